// Acceptance suite: runs every acceptance criterion against the reference
// configuration REF = (c=1, c_h=1, c_p=3, q=0.7, uniform(0,1) demand, x0=0)
// and prints one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "invlab/invlab.hpp"

using namespace invlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int index, const std::string& name, const std::function<bool(std::string&)>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %-22s %s (%.2f s)\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

ModelParams ref_params(int n) { return ModelParams{1.0, 1.0, 3.0, 0.7, n, 0.0}; }

DemandModel ref_demand(int cells = 512) {
    return make_demand(DemandSpec::uniform(0.0, 1.0, cells));
}

// exhaustive expectation of the extracted policy's cost over the (Y, D)
// quadrature outcome tree; independent re-derivation of dynamics and costs
double enumerate_policy_cost(const PolicyTable& pol, const ModelParams& p,
                             const DemandModel& d, int period, double x) {
    if (period > p.n) return 0.0;
    const double y = order_up_to(pol, period, x, p.n);
    const double order_cost = p.c * (y - x);
    double acc = 0.0;
    for (std::size_t j = 0; j < d.grid.size(); ++j) {
        const double dj = d.grid[j];
        const double tail = enumerate_policy_cost(pol, p, d, period + 1, y - dj);
        const double filled = order_cost + carrying_cost(y - dj, p) + tail;
        const double delayed = order_cost + carrying_cost(x - dj, p) + tail;
        acc += d.prob_weight[j] * (p.q * filled + (1.0 - p.q) * delayed);
    }
    return acc;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.5g", v);
    return buf;
}

// ---------------------------------------------------------------------------

bool c1_solver_oracle(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = ref_params(2);
    // smallest demand grid the model accepts (the construction floor is 64 cells)
    const auto d = ref_demand(64);
    const auto res = solve(p, d);
    const double oracle = enumerate_policy_cost(res.policy, p, d, 1, p.x0);
    const double rel = std::fabs(res.expected_cost - oracle) / std::fabs(oracle);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail = "v_2(0)=" + fmt(res.expected_cost) + " oracle=" + fmt(oracle) +
             " rel=" + fmt(rel);
    return rel <= 1e-3 && secs < 1.0;
}

bool c2_base_stock_structure(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = ref_params(50);
    const auto d = ref_demand();
    const auto grid = make_state_grid(p, d);
    const double h = grid.h;

    std::vector<double> v(grid.count, 0.0);
    std::vector<double> levels;
    std::vector<bool> active;
    double worst_shape = 0.0;
    for (int k = 1; k <= p.n; ++k) {
        const auto row = bellman_step(v, p, d, grid);
        const double s = row.target.front();
        double sup_dev = 0.0, shape = 0.0;
        for (std::size_t i = 0; i < grid.count; ++i) {
            sup_dev = std::max(sup_dev, std::fabs(row.target[i] - grid.at(i)));
            shape = std::max(shape, std::fabs(row.target[i] - std::max(grid.at(i), s)));
        }
        active.push_back(sup_dev > 2.0 * h);
        levels.push_back(s);
        if (active.back()) worst_shape = std::max(worst_shape, shape);
        v = row.value;
    }

    bool monotone = true;
    double prev = -1e300;
    for (int k = 1; k <= p.n; ++k) {
        if (!active[static_cast<std::size_t>(k - 1)]) continue;
        if (levels[static_cast<std::size_t>(k - 1)] < prev - 2.0 * h) monotone = false;
        prev = std::max(prev, levels[static_cast<std::size_t>(k - 1)]);
    }

    // quantile bounds apply to the principal-range levels k >= n0+2
    const int n0 = compute_n0(p);
    const double lower = d.quantile(((p.q + n0 + 1) * p.c_p - p.c) /
                                    ((p.q + n0 + 1) * (p.c_p + p.c_h)));
    const double upper = d.quantile(p.c_p / (p.c_p + p.c_h));
    bool bounds_ok = true;
    for (int k = n0 + 2; k <= p.n; ++k) {
        if (!active[static_cast<std::size_t>(k - 1)]) continue;
        const double s = levels[static_cast<std::size_t>(k - 1)];
        if (s < lower - 2.0 * h || s > upper + 2.0 * h) bounds_ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail = "shape_dev=" + fmt(worst_shape) + " monotone=" + (monotone ? "yes" : "no") +
             " levels(k>=" + std::to_string(n0 + 2) + ") in [" + fmt(lower) + "," + fmt(upper) +
             "]+-2h=" + (bounds_ok ? "yes" : "no");
    return worst_shape <= 2.0 * h && monotone && bounds_ok && secs < 30.0;
}

bool c3_slope_identity(std::string& detail) {
    const auto p = ref_params(50);
    const auto d = ref_demand();
    const auto res = solve(p, d);
    const auto& g = res.values.grid;
    const double slope = p.c + p.c_p * (1.0 - p.q);  // 1.9
    const double tol = 5.0 * g.h * (p.c + p.c_p);

    const auto idx = [&](double x) {
        return static_cast<std::size_t>(std::llround((x - g.x_lo) / g.h));
    };
    const std::size_t lo = idx(-0.9), hi = idx(0.0);
    double worst = 0.0;
    for (int k = 20; k <= 35; ++k) {
        const auto& vk = res.values.v[static_cast<std::size_t>(k)];
        for (std::size_t i = lo; i <= hi; ++i) {
            for (std::size_t j = i; j <= hi; ++j) {
                const double expected = (g.at(j) - g.at(i)) * slope;
                worst = std::max(worst, std::fabs(vk[i] - vk[j] - expected));
            }
        }
    }
    detail = "max|residual|=" + fmt(worst) + " tol=" + fmt(tol);
    return worst <= tol;
}

bool c4_martingale_suite(std::string& detail) {
    const auto p = ref_params(50);
    const auto d = ref_demand();
    const auto res = solve(p, d);
    const PolicySpec policy = PolicySpec::optimal(res.policy);

    const auto suite = martingale_suite(policy, p, d, res.values, 1000, 20260810);
    const double resid_tol = 64.0 * p.n * 1e-16 * std::max(1.0, res.expected_cost);
    const bool telescoping_ok = suite.max_telescoping_residual <= resid_tol;

    bool cond_ok = true;
    double worst = 0.0;
    const double cond_tol = 1e-3 * res.expected_cost;
    for (double x : {-1.5, -0.75, -0.25, 0.25}) {
        for (int i : {1, 13, 25, 38, 50}) {
            const double r = conditional_mean_check(x, i, res.values, policy, p, d);
            worst = std::max(worst, r);
            cond_ok = cond_ok && r <= cond_tol;
        }
    }
    detail = "telescope=" + fmt(suite.max_telescoping_residual) + " cond_max=" + fmt(worst) +
             " varid:|" + fmt(suite.sample_var) + "-" + fmt(suite.sum_mean_d_sq) +
             "|<=4se=" + (suite.variance_identity_pass ? "yes" : "no");
    return telescoping_ok && cond_ok && suite.variance_identity_pass;
}

bool c5_ergodicity(std::string& detail) {
    const auto p = ref_params(50);
    const auto d = ref_demand();
    const auto res = solve(p, d);

    const double kappa = kappa_bound(p, res.policy.n0);
    const bool kappa_ok = std::fabs(kappa - 0.75) <= 1e-15;

    bool deltas_ok = true;
    double max_delta = 0.0;
    for (int period = 1; period <= p.n; ++period) {
        if (!res.policy.by_remaining(p.n - period + 1).active) continue;
        const auto est = dobrushin_delta(res.policy, d, period, p.n);
        max_delta = std::max(max_delta, est.delta);
        deltas_ok = deltas_ok && est.delta <= 0.75 + 1e-6;
    }
    const auto ad = augmented_kernel_delta(res.policy, d, p, p.n);  // final period is active
    const bool augmented_ok = ad.delta_z <= ad.delta_x + 1e-12;

    const auto uni_u = check_soft_unimodality(ref_demand(), {0.1, 0.3, 0.7});
    const auto uni_t =
        check_soft_unimodality(make_demand(DemandSpec::triangular(0.0, 0.5, 1.0)), {0.1, 0.5});
    const auto uni_m = check_soft_unimodality(
        make_demand(DemandSpec::uniform_mixture(0.0, 0.2, 0.8, 1.0, 0.5, 512)), {0.1});
    const bool uni_ok = uni_u.overall && uni_t.overall && !uni_m.overall;

    detail = "kappa=" + fmt(kappa) + " max_delta=" + fmt(max_delta) + " dz<=dx=" +
             (augmented_ok ? "yes" : "no") + " unimodal(U,T,mix)=" +
             (uni_u.overall ? "P" : "F") + (uni_t.overall ? "P" : "F") +
             (uni_m.overall ? "P" : "F");
    return kappa_ok && deltas_ok && augmented_ok && uni_ok;
}

bool c6_variance_growth(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto d = ref_demand();
    const auto sweep = horizon_sweep(PolicyKind::Optimal, 0.0, ref_params(1), d,
                                     {25, 50, 100, 200}, 10000, 20260810);
    const auto fit = variance_growth(sweep);
    bool strictly_increasing = true;
    for (std::size_t i = 1; i < sweep.size(); ++i)
        strictly_increasing =
            strictly_increasing && sweep[i].summary.variance > sweep[i - 1].summary.variance;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail = "slope=" + fmt(fit.slope) + " r2=" + fmt(fit.r2) + " beta_hat=" + fmt(fit.beta_hat) +
             " increasing=" + (strictly_increasing ? "yes" : "no");
    return fit.pass && strictly_increasing && secs < 300.0;
}

bool c7_clt(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = ref_params(200);
    const auto d = ref_demand();
    const auto res = solve(p, d);
    const auto batch =
        simulate_batch(PolicySpec::optimal(res.policy), p, d, 20000, 20260810, 2);
    const auto rep = clt_test(batch.costs);

    CounterRng rng(StreamSpec{20260810, 777});
    std::vector<double> expo(10000);
    for (auto& v : expo) v = -std::log(1.0 - rng.next_unit());
    const auto control = clt_test(expo);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail = "ks=" + fmt(rep.ks) + " skew=" + fmt(rep.skewness) +
             " exkurt=" + fmt(rep.excess_kurtosis) + " control_ks=" + fmt(control.ks);
    return rep.ks <= 0.02 && std::fabs(rep.skewness) <= 0.1 &&
           std::fabs(rep.excess_kurtosis) <= 0.25 && control.ks >= 0.05 && secs < 300.0;
}

bool c8_concentration(std::string& detail) {
    const auto p = ref_params(100);
    const auto d = ref_demand();
    const auto res = solve(p, d);
    const PolicySpec policy = PolicySpec::optimal(res.policy);

    const auto suite = martingale_suite(policy, p, d, res.values, 1000, 20260810);
    const double b_hat = suite.b_hat;
    const auto batch = simulate_batch(policy, p, d, 10000, 20260810, 2);
    std::vector<double> lambdas;
    for (double f : {2.0, 4.0, 8.0}) lambdas.push_back(f * std::sqrt(100.0) * b_hat / 4.0);
    const auto table = hoeffding_check(batch.costs, 1.25 * b_hat, p.n, lambdas);

    // synthetic control: +-1 coin sums with the exact bound B = 1
    const int cn = 100;
    std::vector<double> sums(10000);
    for (std::size_t r = 0; r < sums.size(); ++r) {
        CounterRng rng(StreamSpec{99, r});
        double s = 0.0;
        for (int i = 0; i < cn; ++i) s += rng.next_unit() < 0.5 ? 1.0 : -1.0;
        sums[r] = s;
    }
    const auto coin = hoeffding_check(sums, 1.0, cn, {10.0, 20.0, 30.0});

    detail = "b_hat=" + fmt(b_hat) + " tails=";
    for (const auto& row : table.rows)
        detail += fmt(row.empirical) + "<=" + fmt(row.bound + row.slack) + " ";
    detail += "coin=" + std::string(coin.pass ? "PASS" : "FAIL");
    return table.pass && coin.pass;
}

bool c9_stochastic_order(std::string& detail) {
    const auto p = ref_params(50);
    const auto d = ref_demand();
    const auto res = solve(p, d);
    const auto opt = simulate_batch(PolicySpec::optimal(res.policy), p, d, 10000, 20260810, 2);
    const auto never =
        simulate_batch(PolicySpec::never_order(), p, d, 10000, mix64(20260810 ^ 1), 2);
    const auto fixed = simulate_batch(PolicySpec::fixed_base_stock(0.9), p, d, 10000,
                                      mix64(20260810 ^ 2), 2);

    const auto rep_never = stochastic_order_compare(opt.costs, never.costs);
    const auto rep_fixed = stochastic_order_compare(opt.costs, fixed.costs);

    // controls: identical samples and a shifted dominator
    const auto identical = stochastic_order_compare(opt.costs, opt.costs);
    std::vector<double> shifted = opt.costs;
    for (auto& v : shifted) v += 1.0;
    const auto shift_rep = stochastic_order_compare(opt.costs, shifted);
    const bool controls_ok = identical.violation == 0.0 &&
                             identical.verdict == DominanceVerdict::Consistent &&
                             shift_rep.violation == 0.0 &&
                             shift_rep.verdict == DominanceVerdict::Consistent;

    detail = std::string("vs_never=") + to_string(rep_never.verdict) + "(V=" +
             fmt(rep_never.violation) + ") vs_fixed(0.9)=" + to_string(rep_fixed.verdict) +
             "(V=" + fmt(rep_fixed.violation) + "@" + fmt(rep_fixed.location) +
             ") controls=" + (controls_ok ? "ok" : "bad");
    return controls_ok;
}

bool c10_determinism(std::string& detail) {
    const char* bin = std::getenv("INVLAB_BIN");
    if (!bin || !*bin) {
        detail = "INVLAB_BIN not set";
        return false;
    }
    const fs::path work =
        fs::temp_directory_path() / ("invlab_accept_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg_path = work / "ref.json";
    {
        std::ofstream os(cfg_path);
        os << R"({
  "schema_version": 1,
  "params": {"c": 1.0, "c_h": 1.0, "c_p": 3.0, "q": 0.7, "x0": 0.0},
  "demand": {"family": "uniform", "a": 0.0, "b": 1.0, "M": 256},
  "run": {"horizons": [10], "replications": 500, "master_seed": 20260810,
          "retained_trajectories": 1},
  "output": {"directory": ")" << (work / "out").string() << R"("}
})";
    }
    auto run = [&](const std::string& sub) {
        const std::string cmd =
            std::string(bin) + " " + sub + " --config " + cfg_path.string() + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    auto slurp = [](const fs::path& f) {
        std::ifstream is(f, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    };

    bool ok = true;
    for (const std::string sub : {"solve", "simulate"}) {
        if (!run(sub)) {
            detail = sub + " failed";
            fs::remove_all(work);
            return false;
        }
        std::vector<std::pair<fs::path, std::string>> first;
        for (const auto& e : fs::directory_iterator(work / "out")) {
            const auto name = e.path().filename().string();
            if (name.rfind("manifest.archive", 0) == 0) continue;
            first.emplace_back(e.path(), slurp(e.path()));
        }
        if (!run(sub)) {
            detail = sub + " rerun failed";
            fs::remove_all(work);
            return false;
        }
        for (const auto& [path, bytes] : first) ok = ok && slurp(path) == bytes;
    }
    fs::remove_all(work);
    detail = ok ? "solve+simulate byte-identical across reruns" : "byte mismatch";
    return ok;
}

}  // namespace

int main() {
    std::printf("invlab acceptance suite, reference configuration "
                "(c=1, c_h=1, c_p=3, q=0.7, uniform(0,1), x0=0)\n");
    criterion(1, "solver oracle", c1_solver_oracle);
    criterion(2, "base-stock structure", c2_base_stock_structure);
    criterion(3, "backlog slope identity", c3_slope_identity);
    criterion(4, "martingale suite", c4_martingale_suite);
    criterion(5, "ergodic coefficients", c5_ergodicity);
    criterion(6, "variance growth", c6_variance_growth);
    criterion(7, "asymptotic normality", c7_clt);
    criterion(8, "concentration", c8_concentration);
    criterion(9, "stochastic order", c9_stochastic_order);
    criterion(10, "determinism", c10_determinism);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
