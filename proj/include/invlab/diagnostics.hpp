#pragma once

// Numerical verification of the model's probabilistic structure: the
// optimality-martingale decomposition of realized costs, contraction
// coefficients of the inventory kernels (plain and on the state space
// enlarged with the fulfilment flag), variance growth across horizons,
// normality of standardized costs, martingale concentration tails, and
// empirical stochastic-order comparisons.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "invlab/demand.hpp"
#include "invlab/model.hpp"
#include "invlab/simulate.hpp"
#include "invlab/solver.hpp"
#include "invlab/stats.hpp"

namespace invlab {

// ============================================================================
// Optimality martingale
// ============================================================================

// M_i = C_i + v_{n-i}(X_{i+1}) along one path; the differences sum to
// C_n - v_n(x0). The telescoping residual is an identity up to floating-point
// rounding of the stored differences.
struct MartingaleDecomposition {
    std::vector<double> m;           // M_0..M_n
    std::vector<double> d;           // differences d_1..d_n
    double telescoping_residual = 0.0;
    long clamped_lookups = 0;
};

inline MartingaleDecomposition martingale_decompose(const Trajectory& tr,
                                                    const ValueGrid& vg,
                                                    const ModelParams& p) {
    const int n = tr.periods();
    if (static_cast<std::size_t>(n) + 1 != vg.v.size())
        throw std::invalid_argument("martingale_decompose: horizon mismatch");
    MartingaleDecomposition out;
    out.m.reserve(static_cast<std::size_t>(n) + 1);
    out.d.reserve(static_cast<std::size_t>(n));
    out.m.push_back(vg.grid.interp(vg.v[static_cast<std::size_t>(n)], p.x0, &out.clamped_lookups));
    for (int i = 1; i <= n; ++i) {
        const auto k = static_cast<std::size_t>(n - i);  // remaining periods after i
        const double cont =
            vg.grid.interp(vg.v[k], tr.x[static_cast<std::size_t>(i)], &out.clamped_lookups);
        out.m.push_back(tr.cum_cost[static_cast<std::size_t>(i - 1)] + cont);
        out.d.push_back(out.m[static_cast<std::size_t>(i)] - out.m[static_cast<std::size_t>(i - 1)]);
    }
    // Neumaier-compensated sum of the stored differences
    double sum = 0.0, comp = 0.0;
    for (double di : out.d) {
        const double t = sum + di;
        comp += (std::fabs(sum) >= std::fabs(di)) ? (sum - t) + di : (di - t) + sum;
        sum = t;
    }
    out.telescoping_residual = (sum + comp) - (tr.total_cost() - out.m.front());
    return out;
}

/// Exact-quadrature residual of the martingale mean condition at one state:
/// | E[ P + v_{n-i}(y - D) | X_i = x ] - v_{n-i+1}(x) |.
inline double conditional_mean_check(double x, int period, const ValueGrid& vg,
                                     const PolicySpec& policy, const ModelParams& p,
                                     const DemandModel& d) {
    const int n = p.n;
    if (period < 1 || period > n)
        throw std::domain_error("conditional_mean_check: period out of range");
    const auto k = static_cast<std::size_t>(n - period + 1);
    const double y = policy.target(period, x, n);
    double acc = 0.0;
    for (std::size_t j = 0; j < d.grid.size(); ++j) {
        const double dj = d.grid[j];
        const double cont = vg.grid.interp(vg.v[k - 1], y - dj);
        const double filled = p.c * (y - x) + carrying_cost(y - dj, p) + cont;
        const double delayed = p.c * (y - x) + carrying_cost(x - dj, p) + cont;
        acc += d.prob_weight[j] * (p.q * filled + (1.0 - p.q) * delayed);
    }
    return std::fabs(acc - vg.grid.interp(vg.v[k], x));
}

// ============================================================================
// Contraction coefficients
// ============================================================================

/// Uniform bound on the one-step contraction coefficient over the principal
/// range, from the quantile estimates of the stocking levels.
inline double kappa_bound(const ModelParams& p, int n0) {
    const double r1 = p.c_p / (p.c_h + p.c_p);
    const double np1 = p.q + n0 + 1;
    const double r2 = (np1 * p.c_h + p.c) / (np1 * (p.c_h + p.c_p));
    return std::max(r1, r2);
}

struct DeltaEstimate {
    int period = 0;
    int remaining = 0;
    double eps_max = 0.0;
    double delta = 0.0;
    std::vector<double> eps_grid;
    std::vector<double> tv_values;
};

// Contraction coefficient of the one-step inventory kernel for an active
// period: rows indexed by states x differ only through the shift
// eps = |gamma(x') - gamma(x)|, so delta is the largest total-variation
// distance over feasible shifts. Refuses densities that are not softly
// unimodal, since the shift formula relies on the dominating set being a
// half-line.
inline DeltaEstimate dobrushin_delta(const PolicyTable& pol, const DemandModel& d,
                                     int period, int n, int eps_points = 32) {
    if (n != pol.n) throw std::domain_error("dobrushin_delta: horizon mismatch");
    const PolicyRow& row = pol.by_remaining(n - period + 1);
    if (!row.active)
        throw std::domain_error("dobrushin_delta: period is not in the active range");

    DeltaEstimate est;
    est.period = period;
    est.remaining = n - period + 1;
    const double gamma_max = std::max(pol.s_cap, row.level);
    est.eps_max = std::max(0.0, gamma_max - row.level);

    est.eps_grid.resize(static_cast<std::size_t>(eps_points));
    for (int j = 0; j < eps_points; ++j)
        est.eps_grid[static_cast<std::size_t>(j)] =
            est.eps_max * static_cast<double>(j) / static_cast<double>(eps_points - 1);

    auto uni = check_soft_unimodality(d, est.eps_grid);
    if (!uni.overall)
        throw std::domain_error(
            "dobrushin_delta: demand density is not softly unimodal; the shift "
            "formula for the kernel total-variation distance does not apply");

    est.tv_values.reserve(est.eps_grid.size());
    for (double eps : est.eps_grid) {
        const double tv = tv_shift(d, eps);
        est.tv_values.push_back(tv);
        est.delta = std::max(est.delta, tv);
    }
    return est;
}

struct AugmentedDelta {
    double delta_x = 0.0;  // plain inventory kernel
    double delta_z = 0.0;  // kernel on the enlarged space (state, flag)
};

// On the enlarged space the kernel row splits into flag slices with weights
// (1-q, q), each carrying the same next-state distribution, so the enlarged
// contraction coefficient cannot exceed the plain one.
inline AugmentedDelta augmented_kernel_delta(const PolicyTable& pol, const DemandModel& d,
                                             const ModelParams& p, int period,
                                             int eps_points = 32) {
    DeltaEstimate base = dobrushin_delta(pol, d, period, pol.n, eps_points);
    AugmentedDelta out;
    out.delta_x = base.delta;
    for (std::size_t j = 0; j < base.eps_grid.size(); ++j) {
        const double tv = base.tv_values[j];
        const double dz = (1.0 - p.q) * tv + p.q * tv;
        out.delta_z = std::max(out.delta_z, dz);
    }
    return out;
}

// ============================================================================
// Variance growth
// ============================================================================

struct VarianceFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double beta_hat = 0.0;  // min over horizons of variance / n
    bool pass = false;      // slope > 0 and r2 >= 0.95
    std::vector<double> horizons;
    std::vector<double> variances;
};

inline VarianceFit variance_growth(const std::vector<HorizonSample>& samples) {
    if (samples.size() < 3)
        throw std::invalid_argument("variance_growth: need at least three horizons");
    VarianceFit fit;
    fit.beta_hat = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (s.costs.size() < 1000)
            throw std::invalid_argument("variance_growth: need at least 1000 paths per horizon");
        fit.horizons.push_back(static_cast<double>(s.horizon));
        fit.variances.push_back(s.summary.variance);
        fit.beta_hat = std::min(fit.beta_hat, s.summary.variance / s.horizon);
    }
    const OlsFit ols = ols_fit(fit.horizons, fit.variances);
    fit.slope = ols.slope;
    fit.intercept = ols.intercept;
    fit.r2 = ols.r2;
    fit.pass = fit.slope > 0.0 && fit.r2 >= 0.95;
    return fit;
}

// ============================================================================
// Asymptotic normality
// ============================================================================

struct DistributionReport {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks = 0.0;  // distance of the standardized sample to N(0,1)
};

inline DistributionReport clt_test(const std::vector<double>& costs) {
    if (costs.size() < 1000) throw std::invalid_argument("clt_test: need at least 1000 samples");
    const SampleMoments m = sample_moments(costs);
    if (!(m.variance > 0.0)) throw std::invalid_argument("clt_test: zero sample variance");
    DistributionReport rep;
    rep.n = m.n;
    rep.mean = m.mean;
    rep.variance = m.variance;
    rep.skewness = m.skewness;
    rep.excess_kurtosis = m.excess_kurtosis;
    const double sd = std::sqrt(m.variance * (static_cast<double>(m.n) - 1.0) /
                                static_cast<double>(m.n));
    std::vector<double> z;
    z.reserve(costs.size());
    for (double c : costs) z.push_back((c - m.mean) / sd);
    rep.ks = ks_distance(std::move(z), [](double t) { return normal_cdf(t); });
    return rep;
}

// ============================================================================
// Concentration
// ============================================================================

struct HoeffdingRow {
    double lambda = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // three binomial standard errors
    bool pass = false;
};

struct HoeffdingTable {
    double b = 0.0;
    std::vector<HoeffdingRow> rows;
    bool pass = true;
};

/// Empirical two-sided tails of |C_n - mean| against the martingale
/// concentration bound 2 exp(-lambda^2 / (2 n B^2)). B is passed in; the
/// diagnostics pipeline supplies the empirical difference sup inflated by 25%.
inline HoeffdingTable hoeffding_check(const std::vector<double>& costs, double b, int n,
                                      const std::vector<double>& lambdas) {
    if (!(b > 0.0)) throw std::invalid_argument("hoeffding_check: bound B must be positive");
    if (costs.empty()) throw std::invalid_argument("hoeffding_check: empty sample");
    HoeffdingTable table;
    table.b = b;
    const SampleMoments m = sample_moments(costs);
    const double r = static_cast<double>(costs.size());
    for (double lam : lambdas) {
        HoeffdingRow row;
        row.lambda = lam;
        std::size_t hits = 0;
        for (double c : costs)
            if (std::fabs(c - m.mean) >= lam) ++hits;
        row.empirical = static_cast<double>(hits) / r;
        row.bound = 2.0 * std::exp(-lam * lam / (2.0 * static_cast<double>(n) * b * b));
        row.slack = 3.0 * std::sqrt(std::max(row.empirical * (1.0 - row.empirical), 0.0) / r);
        row.pass = row.empirical <= row.bound + row.slack;
        table.pass = table.pass && row.pass;
        table.rows.push_back(row);
    }
    return table;
}

// ============================================================================
// Martingale suite over a batch of paths
// ============================================================================

struct MartingaleSuite {
    std::size_t paths = 0;
    double max_telescoping_residual = 0.0;
    double b_hat = 0.0;              // sup |d_i| over all paths and periods
    double sample_var = 0.0;         // Var of C_n over the batch
    double sum_mean_d_sq = 0.0;      // sum over i of mean(d_i^2)
    double combined_se = 0.0;        // SE(sample var) + SE(per-path sum of d^2)
    bool variance_identity_pass = false;
    long clamped_lookups = 0;
};

inline MartingaleSuite martingale_suite(const PolicySpec& policy, const ModelParams& p,
                                        const DemandModel& d, const ValueGrid& vg,
                                        std::size_t paths, std::uint64_t master_seed) {
    if (paths < 2) throw std::invalid_argument("martingale_suite: need at least two paths");
    MartingaleSuite suite;
    suite.paths = paths;
    std::vector<double> costs(paths);
    std::vector<double> per_path_sumsq(paths);
    for (std::size_t r = 0; r < paths; ++r) {
        Trajectory tr = simulate_path(policy, p, d, StreamSpec{master_seed, r});
        MartingaleDecomposition md = martingale_decompose(tr, vg, p);
        suite.max_telescoping_residual =
            std::max(suite.max_telescoping_residual, std::fabs(md.telescoping_residual));
        suite.clamped_lookups += md.clamped_lookups;
        double sumsq = 0.0;
        for (double di : md.d) {
            suite.b_hat = std::max(suite.b_hat, std::fabs(di));
            sumsq += di * di;
        }
        per_path_sumsq[r] = sumsq;
        costs[r] = tr.total_cost();
    }
    const SampleMoments mc = sample_moments(costs);
    const SampleMoments ms = sample_moments(per_path_sumsq);
    suite.sample_var = mc.variance;
    suite.sum_mean_d_sq = ms.mean;

    // SE of the variance estimator via the fourth central moment
    const double n = static_cast<double>(paths);
    double m4 = 0.0;
    for (double c : costs) {
        const double dd = c - mc.mean;
        m4 += dd * dd * dd * dd;
    }
    m4 /= n;
    const double var_of_var = std::max(m4 - mc.variance * mc.variance, 0.0) / n;
    suite.combined_se = std::sqrt(var_of_var) + std::sqrt(ms.variance / n);
    suite.variance_identity_pass =
        std::fabs(suite.sample_var - suite.sum_mean_d_sq) <= 4.0 * suite.combined_se;
    return suite;
}

}  // namespace invlab
