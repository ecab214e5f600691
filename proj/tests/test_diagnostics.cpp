#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "invlab/diagnostics.hpp"

using namespace invlab;

namespace {

ModelParams ref_params(int n) { return ModelParams{1.0, 1.0, 3.0, 0.7, n, 0.0}; }

PolicyTable synthetic_policy(int n, double level, double s_cap) {
    PolicyTable pol;
    pol.n = n;
    pol.rows.assign(static_cast<std::size_t>(n), PolicyRow{true, level});
    pol.s_cap = s_cap;
    pol.x_lo = -2.0;
    pol.h = 1.0 / 256.0;
    return pol;
}

}  // namespace

TEST_CASE("telescoping residual vanishes to machine precision", "[diag][martingale]") {
    const auto p = ref_params(50);
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    const auto res = solve(p, d);
    const PolicySpec policy = PolicySpec::optimal(res.policy);
    for (std::uint64_t r = 0; r < 20; ++r) {
        const auto tr = simulate_path(policy, p, d, StreamSpec{314, r});
        const auto md = martingale_decompose(tr, res.values, p);
        CHECK(md.m.front() == Catch::Approx(res.expected_cost));
        CHECK(md.m.back() == tr.total_cost());
        CHECK(std::fabs(md.telescoping_residual) <=
              64.0 * p.n * 1e-16 * std::max(1.0, tr.total_cost()));
    }
}

TEST_CASE("single-period decomposition", "[diag][martingale]") {
    const auto p = ref_params(1);
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    const auto res = solve(p, d);
    const auto tr = simulate_path(PolicySpec::optimal(res.policy), p, d, StreamSpec{1, 0});
    const auto md = martingale_decompose(tr, res.values, p);
    REQUIRE(md.d.size() == 1);
    // v_0 = 0, so the only difference is C_1 - v_1(x0)
    CHECK(md.d[0] == Catch::Approx(tr.total_cost() - res.expected_cost).margin(1e-12));
}

TEST_CASE("conditional mean residual is tiny under the optimal policy", "[diag]") {
    const auto p = ref_params(50);
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    const auto res = solve(p, d);
    const PolicySpec policy = PolicySpec::optimal(res.policy);
    CHECK(conditional_mean_check(0.0, 50, res.values, policy, p, d) <= 1e-3);
    CHECK(conditional_mean_check(0.0, 25, res.values, policy, p, d) <= 1e-3);
    for (double x : {-1.5, -0.5, 0.25, 0.5})
        for (int i : {1, 10, 40})
            CHECK(conditional_mean_check(x, i, res.values, policy, p, d) <=
                  1e-3 * res.expected_cost);
}

TEST_CASE("perturbing a level opens a strict optimality gap", "[diag]") {
    const auto p = ref_params(3);
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    const auto res = solve(p, d);
    const double tol = 1e-3 * res.expected_cost;

    const double base =
        conditional_mean_check(0.0, 3, res.values, PolicySpec::optimal(res.policy), p, d);
    CHECK(base <= tol);

    PolicyTable bumped = res.policy;
    bumped.rows[0].level += 0.1;  // k = 1 rule, i.e. the final period
    const double perturbed =
        conditional_mean_check(0.0, 3, res.values, PolicySpec::optimal(bumped), p, d);
    CHECK(perturbed > tol);
    CHECK(perturbed > 10.0 * base);
}

TEST_CASE("contraction bound", "[diag][kappa]") {
    CHECK(kappa_bound(ref_params(1), 0) == Catch::Approx(0.75));
    CHECK(1.0 - kappa_bound(ref_params(1), 0) == Catch::Approx(0.25));

    ModelParams sym;
    sym.c = 1e-9;
    sym.c_h = 1.0;
    sym.c_p = 1.0;
    sym.q = 1.0;
    CHECK(kappa_bound(sym, 0) == Catch::Approx(0.5).margin(1e-9));

    // kappa < 1 whenever c_h > 0 and c < c_p (q + n0 + 1)
    for (double c : {0.5, 1.0, 2.9}) {
        ModelParams p = ref_params(1);
        p.c = c;
        const int n0 = compute_n0(p);
        CHECK(kappa_bound(p, n0) < 1.0);
    }
}

TEST_CASE("kernel contraction from level shifts", "[diag][delta]") {
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    // states order up to 0.55 while the cap is 0.75: the largest feasible
    // shift between kernel rows is 0.2, and for the uniform that mass is 0.2
    const auto pol = synthetic_policy(4, 0.55, 0.75);
    const auto est = dobrushin_delta(pol, d, 2, 4);
    CHECK(est.eps_max == Catch::Approx(0.2));
    CHECK(est.delta == Catch::Approx(0.2).margin(2.0 * d.step));

    // constant-target period: rows coincide and the coefficient vanishes
    const auto tight = synthetic_policy(4, 0.75, 0.75);
    CHECK(dobrushin_delta(tight, d, 2, 4).delta == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("delta refuses non-softly-unimodal demand", "[diag][delta]") {
    const auto d = make_demand(DemandSpec::uniform_mixture(0.0, 0.2, 0.8, 1.0, 0.5, 512));
    const auto pol = synthetic_policy(4, 0.55, 0.75);
    CHECK_THROWS_AS(dobrushin_delta(pol, d, 2, 4), std::domain_error);
}

TEST_CASE("delta never exceeds kappa over the active periods", "[diag][delta]") {
    const auto p = ref_params(30);
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    const auto res = solve(p, d);
    const double kappa = kappa_bound(p, res.policy.n0);
    for (int period = 1; period <= p.n; ++period) {
        if (!res.policy.by_remaining(p.n - period + 1).active) continue;
        const auto est = dobrushin_delta(res.policy, d, period, p.n);
        CHECK(est.delta <= kappa + 1e-6);
    }
}

TEST_CASE("enlarged-space kernel contracts no worse", "[diag][delta]") {
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    for (double q : {0.0, 0.7, 1.0}) {
        ModelParams p = ref_params(4);
        p.q = q;
        const auto pol = synthetic_policy(4, 0.55, 0.75);
        const auto ad = augmented_kernel_delta(pol, d, p, 2);
        INFO("q = " << q);
        CHECK(ad.delta_z <= ad.delta_x + 1e-12);
        if (q == 0.0 || q == 1.0) CHECK(ad.delta_z == Catch::Approx(ad.delta_x).margin(1e-15));
    }
}

TEST_CASE("variance growth fit on synthetic independent sums", "[diag][variance]") {
    // i.i.d. per-period terms U^2 with variance 4/45: Var[C_n] = (4/45) n
    const double sigma2 = 4.0 / 45.0;
    std::vector<HorizonSample> samples;
    CounterRng rng(StreamSpec{31337, 0});
    for (int n : {20, 40, 80, 160}) {
        HorizonSample hs;
        hs.horizon = n;
        hs.costs.resize(4000);
        for (auto& c : hs.costs) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double u = rng.next_unit();
                acc += u * u;
            }
            c = acc;
        }
        const auto m = sample_moments(hs.costs);
        hs.summary.variance = m.variance;
        hs.summary.mean = m.mean;
        hs.summary.replications = hs.costs.size();
        samples.push_back(std::move(hs));
    }
    const auto fit = variance_growth(samples);
    CHECK(fit.pass);
    CHECK(fit.slope == Catch::Approx(sigma2).epsilon(0.05));
    CHECK(fit.r2 >= 0.99);
    CHECK(fit.beta_hat > 0.0);
}

TEST_CASE("variance growth degenerate and validation cases", "[diag][variance]") {
    std::vector<HorizonSample> flat;
    for (int n : {10, 20, 30}) {
        HorizonSample hs;
        hs.horizon = n;
        hs.costs.assign(1000, 5.0);
        hs.summary.variance = 0.0;
        flat.push_back(std::move(hs));
    }
    const auto fit = variance_growth(flat);
    CHECK(fit.slope == Catch::Approx(0.0).margin(1e-12));
    CHECK_FALSE(fit.pass);

    std::vector<HorizonSample> too_few(flat.begin(), flat.begin() + 2);
    CHECK_THROWS_AS(variance_growth(too_few), std::invalid_argument);
}

TEST_CASE("clt test on exact normal scores and on a skewed control", "[diag][clt]") {
    std::vector<double> scores(2000);
    for (std::size_t i = 0; i < scores.size(); ++i)
        scores[i] = normal_quantile((static_cast<double>(i) + 0.5) / 2000.0);
    const auto rep = clt_test(scores);
    CHECK(rep.ks <= 2.0 / 2000.0 + 1e-4);  // standardization adds a whisker
    CHECK(std::fabs(rep.skewness) < 0.01);

    CounterRng rng(StreamSpec{8, 8});
    std::vector<double> expo(10000);
    for (auto& v : expo) v = -std::log(1.0 - rng.next_unit());
    const auto bad = clt_test(expo);
    CHECK(bad.ks >= 0.05);
    CHECK(bad.skewness > 1.0);

    CHECK_THROWS_AS(clt_test(std::vector<double>(1000, 3.0)), std::invalid_argument);
    CHECK_THROWS_AS(clt_test(std::vector<double>(10, 1.0)), std::invalid_argument);
}

TEST_CASE("martingale concentration on coin-flip sums", "[diag][hoeffding]") {
    // S_100 of fair +-1 coins: differences are bounded by exactly 1
    const int n = 100;
    const std::size_t reps = 10000;
    std::vector<double> sums(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        CounterRng rng(StreamSpec{555, r});
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += rng.next_unit() < 0.5 ? 1.0 : -1.0;
        sums[r] = s;
    }
    const auto table = hoeffding_check(sums, 1.0, n, {0.0, 30.0});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].bound == Catch::Approx(2.0));
    CHECK(table.rows[0].pass);  // bound 2 dominates any frequency
    CHECK(table.rows[1].bound == Catch::Approx(2.0 * std::exp(-4.5)).epsilon(1e-12));
    // exact two-sided binomial tail is ~0.0035, far below the bound
    CHECK(table.rows[1].empirical <= table.rows[1].bound);
    CHECK(table.pass);

    CHECK_THROWS_AS(hoeffding_check(sums, 0.0, n, {1.0}), std::invalid_argument);
}

TEST_CASE("empirical difference bound is stable across horizons", "[diag][martingale]") {
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    double b50 = 0.0, b200 = 0.0;
    for (int n : {50, 200}) {
        const ModelParams p{1.0, 1.0, 3.0, 0.7, n, 0.0};
        const auto res = solve(p, d);
        const auto s =
            martingale_suite(PolicySpec::optimal(res.policy), p, d, res.values, 1000, 20260810);
        (n == 50 ? b50 : b200) = s.b_hat;
    }
    CHECK(std::fabs(b200 - b50) <= 0.10 * b50);
}

TEST_CASE("martingale suite: variance identity at desk scale", "[diag][martingale]") {
    const auto p = ref_params(30);
    const auto d = make_demand(DemandSpec::uniform(0.0, 1.0, 512));
    const auto res = solve(p, d);
    const auto suite =
        martingale_suite(PolicySpec::optimal(res.policy), p, d, res.values, 600, 2718);
    CHECK(suite.paths == 600);
    CHECK(suite.max_telescoping_residual <= 1e-10);
    CHECK(suite.b_hat > 0.0);
    CHECK(suite.variance_identity_pass);
}
