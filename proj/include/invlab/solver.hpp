#pragma once

// Backward-induction solver for the delayed-delivery inventory model and the
// structural checks on the extracted policy.
//
// One step of the recursion evaluates, for every grid state x,
//     v_next(x) = min_{y in [x, x_hi]}  c (y - x) + q E[L(y - D)]
//                 + (1 - q) E[L(x - D)] + E[v_prev(y - D)],
// with expectations by trapezoid quadrature on the demand grid and linear
// interpolation of v_prev. The objective separates into H(x) + G(y) with
//     H(x) = -c x + (1 - q) E[L(x - D)],
//     G(y) =  c y + q E[L(y - D)] + E[v_prev(y - D)],
// so the minimization is a suffix scan of G over the grid followed by a
// golden-section polish of the best bracket (tolerance h/16). G does not
// depend on x, which lets every state in the interior share one refined
// minimizer and keeps the backlog-region value differences exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invlab/demand.hpp"
#include "invlab/grid.hpp"
#include "invlab/model.hpp"

namespace invlab {

// ============================================================================
// Result types
// ============================================================================

struct ValueGrid {
    StateGrid grid;
    std::vector<std::vector<double>> v;  // v[k] for k = 0..n remaining periods
};

struct PolicyRow {
    bool active = false;
    double level = 0.0;  // order-up-to level when active
};

struct LevelBounds {
    double lower_first_level = 0.0;  // quantile bound below the earliest level
    double upper_limit_level = 0.0;  // quantile bound above the limiting level
};

struct PolicyTable {
    int n = 0;
    int n0 = 0;
    double x_lo = 0.0;
    double s_cap = 0.0;  // top of the state grid, also the feasible target cap
    double h = 0.0;
    std::vector<PolicyRow> rows;  // rows[k-1] is the rule with k periods left
    LevelBounds bounds;

    [[nodiscard]] const PolicyRow& by_remaining(int k) const {
        if (k < 1 || k > n) throw std::domain_error("policy: remaining-period count out of range");
        return rows[static_cast<std::size_t>(k - 1)];
    }
};

struct SolveResult {
    ValueGrid values;
    PolicyTable policy;
    double expected_cost = 0.0;  // v_n(x0)
    long underflow_clamps = 0;
};

// ============================================================================
// One Bellman step
// ============================================================================

struct BellmanRow {
    std::vector<double> value;   // v_next on the grid
    std::vector<double> target;  // constrained minimizer y*(x) per grid state
    long underflow_clamps = 0;
};

namespace detail {

struct GEvaluator {
    const ModelParams& p;
    const DemandModel& d;
    const StateGrid& g;
    const std::vector<double>& v_prev;
    long* clamps;

    double operator()(double y) const {
        double carry = 0.0, cont = 0.0;
        const std::size_t m = d.grid.size();
        for (std::size_t j = 0; j < m; ++j) {
            const double z = y - d.grid[j];
            const double w = d.prob_weight[j];
            carry += w * (z >= 0.0 ? p.c_h * z : -p.c_p * z);
            cont += w * g.interp(v_prev, z, clamps);
        }
        return p.c * y + p.q * carry + cont;
    }
};

// Golden-section search for the minimum of f on [lo, hi]; shrinks the bracket
// to `tol` and returns (argmin, min).
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498948482;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace detail

inline BellmanRow bellman_step(const std::vector<double>& v_prev, const ModelParams& p,
                               const DemandModel& d, const StateGrid& g) {
    if (v_prev.size() != g.count)
        throw std::invalid_argument("bellman_step: value row does not match the grid");
    constexpr double kTieTol = 1e-12;
    const std::size_t n = g.count;

    BellmanRow out;
    out.value.resize(n);
    out.target.resize(n);
    detail::GEvaluator geval{p, d, g, v_prev, &out.underflow_clamps};

    std::vector<double> gvals(n);
    for (std::size_t i = 0; i < n; ++i) gvals[i] = geval(g.at(i));

    // suffix minimum of G with smallest-index tie-break within 1e-12
    std::vector<double> suffix_min(n);
    std::vector<std::size_t> suffix_arg(n);
    suffix_min[n - 1] = gvals[n - 1];
    suffix_arg[n - 1] = n - 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        suffix_min[i] = std::min(gvals[i], suffix_min[i + 1]);
        suffix_arg[i] = (gvals[i] <= suffix_min[i] + kTieTol) ? i : suffix_arg[i + 1];
    }

    // refine each distinct bracket once; G is shared across states
    const double tol = g.h / 16.0;
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> refined;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = suffix_arg[i];
        const std::size_t lo = std::max(j, i + 1) - 1;  // max(j-1, i)
        const std::size_t hi = std::min(j + 1, n - 1);
        double y_best = g.at(j);
        double g_best = gvals[j];
        if (hi > lo) {
            auto key = std::make_pair(lo, hi);
            auto it = refined.find(key);
            if (it == refined.end())
                it = refined.emplace(key, detail::golden_min(geval, g.at(lo), g.at(hi), tol)).first;
            // keep the smaller of the refined point and the bracket's grid
            // endpoints, preferring the smallest y within the tie tolerance
            const auto& [y_ref, g_ref] = it->second;
            for (auto [yc, gc] : {std::make_pair(g.at(lo), gvals[lo]),
                                  std::make_pair(y_ref, g_ref),
                                  std::make_pair(g.at(hi), gvals[hi])}) {
                if (gc < g_best - kTieTol || (gc <= g_best + kTieTol && yc < y_best)) {
                    g_best = gc;
                    y_best = yc;
                }
            }
        }
        out.target[i] = std::max(y_best, g.at(i));  // guard against refinement drift
        out.value[i] = -p.c * g.at(i) + g_best;
    }

    // add the x-only carrying term (1-q) E[L(x - D)]
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.at(i);
        double carry = 0.0;
        for (std::size_t j = 0; j < d.grid.size(); ++j) {
            const double z = x - d.grid[j];
            carry += d.prob_weight[j] * (z >= 0.0 ? p.c_h * z : -p.c_p * z);
        }
        out.value[i] += (1.0 - p.q) * carry;
    }
    return out;
}

// ============================================================================
// Full solve
// ============================================================================

inline StateGrid make_state_grid(const ModelParams& p, const DemandModel& d,
                                 double h = 0.0) {
    if (h <= 0.0) h = d.J / 256.0;
    const int n0 = compute_n0(p);
    const double x_lo = -(n0 + 2) * d.J;
    const double s_cap = d.quantile(p.c_p / (p.c_p + p.c_h)) + h;
    return StateGrid::build(x_lo, std::max(p.x0, s_cap), h);
}

/// Backward induction over the full horizon. Classifies each remaining-period
/// count as passive when no state would order more than 2h, otherwise active
/// with the level read at the lowest state, where the y >= x constraint
/// cannot bind.
inline SolveResult solve(const ModelParams& p, const DemandModel& d, double h = 0.0) {
    p.validate();
    const double step = h > 0.0 ? h : d.J / 256.0;
    const double s_cap = d.quantile(p.c_p / (p.c_p + p.c_h)) + step;
    if (p.x0 > s_cap + 1e-12)
        throw std::invalid_argument("solve: x0 exceeds the stocking cap " +
                                    std::to_string(s_cap));
    const StateGrid grid = make_state_grid(p, d, h);

    SolveResult res;
    res.values.grid = grid;
    res.values.v.reserve(static_cast<std::size_t>(p.n) + 1);
    res.values.v.emplace_back(grid.count, 0.0);  // terminal condition

    PolicyTable& pol = res.policy;
    pol.n = p.n;
    pol.n0 = compute_n0(p);
    pol.x_lo = grid.x_lo;
    pol.s_cap = grid.x_hi;
    pol.h = grid.h;
    pol.rows.resize(static_cast<std::size_t>(p.n));

    const double fractile = p.c_p / (p.c_p + p.c_h);
    const double np1 = p.q + pol.n0 + 1;
    pol.bounds.lower_first_level = d.quantile((np1 * p.c_p - p.c) / (np1 * (p.c_p + p.c_h)));
    pol.bounds.upper_limit_level = d.quantile(fractile);

    for (int k = 1; k <= p.n; ++k) {
        BellmanRow row = bellman_step(res.values.v.back(), p, d, grid);
        res.underflow_clamps += row.underflow_clamps;
        double sup_dev = 0.0;
        for (std::size_t i = 0; i < grid.count; ++i)
            sup_dev = std::max(sup_dev, std::fabs(row.target[i] - grid.at(i)));
        PolicyRow& pr = pol.rows[static_cast<std::size_t>(k - 1)];
        pr.active = sup_dev > 2.0 * grid.h;
        pr.level = pr.active ? row.target.front() : 0.0;
        res.values.v.push_back(std::move(row.value));
    }
    res.expected_cost = grid.interp(res.values.v.back(), p.x0);
    return res;
}

/// Order-up-to target for period i (1-based) at state x.
inline double order_up_to(const PolicyTable& pol, int period, double x, int n) {
    if (n != pol.n) throw std::domain_error("order_up_to: horizon mismatch");
    if (period < 1 || period > n) throw std::domain_error("order_up_to: period out of range");
    const PolicyRow& row = pol.by_remaining(n - period + 1);
    return row.active ? std::max(x, row.level) : x;
}

// ============================================================================
// Structure report
// ============================================================================

// Checks the extracted policy against the base-stock characterization:
// monotone levels, the predicted passive tail under both threshold
// conventions (reported, never fatal), the backlog-region value-difference
// identity with slope c + c_p(1-q), and the quantile bounds on the levels in
// the principal range k >= n0+2 (the range the bounds speak about).
struct StructureReport {
    bool levels_monotone = true;
    double monotone_tolerance = 0.0;
    std::vector<int> empirical_passive_k;
    std::vector<int> predicted_passive_k_zero_based;
    std::vector<int> predicted_passive_k_one_based;
    bool passive_match_zero_based = false;
    bool passive_match_one_based = false;

    double slope = 0.0;  // c + c_p(1-q)
    double slope_max_residual = 0.0;
    double slope_tolerance = 0.0;
    bool slope_identity_pass = true;

    double level_lower_bound = 0.0;
    double level_upper_bound = 0.0;
    int bounds_checked_from_k = 0;
    double principal_min_level = 0.0;
    double principal_max_level = 0.0;
    bool level_bounds_pass = true;
    double all_active_min_level = 0.0;
    double all_active_max_level = 0.0;

    [[nodiscard]] bool gate_pass() const {
        return levels_monotone && slope_identity_pass && level_bounds_pass;
    }
};

inline StructureReport structure_report(const PolicyTable& pol, const ValueGrid& vg,
                                        const ModelParams& p, const DemandModel& d) {
    StructureReport rep;
    const double h = pol.h;

    // (a) monotone active levels
    rep.monotone_tolerance = 2.0 * h;
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& row : pol.rows) {
        if (!row.active) continue;
        if (row.level < prev - rep.monotone_tolerance) rep.levels_monotone = false;
        prev = std::max(prev, row.level);
    }

    // (b) passive tail versus the predicted residual range, both conventions
    for (int k = 1; k <= pol.n; ++k)
        if (!pol.by_remaining(k).active) rep.empirical_passive_k.push_back(k);
    const int n0_zero = compute_n0(p, NaturalsConvention::ZeroBased);
    const int n0_one = compute_n0(p, NaturalsConvention::OneBased);
    for (int k = 1; k <= std::min(pol.n, n0_zero + 1); ++k)
        rep.predicted_passive_k_zero_based.push_back(k);
    for (int k = 1; k <= std::min(pol.n, n0_one + 1); ++k)
        rep.predicted_passive_k_one_based.push_back(k);
    rep.passive_match_zero_based =
        rep.empirical_passive_k == rep.predicted_passive_k_zero_based;
    rep.passive_match_one_based =
        rep.empirical_passive_k == rep.predicted_passive_k_one_based;

    // (c) backlog-region value differences: for x, x' <= 0 and active k with
    // level >= 0, v_k(x) - v_k(x') = (x' - x) (c + c_p (1 - q))
    rep.slope = p.c + p.c_p * (1.0 - p.q);
    rep.slope_tolerance = 5.0 * h * (p.c + p.c_p);
    const StateGrid& g = vg.grid;
    const auto zero_idx = static_cast<std::size_t>(
        std::min((0.0 - g.x_lo) / g.h, static_cast<double>(g.count - 1)));
    for (int k = 1; k <= pol.n; ++k) {
        const PolicyRow& row = pol.by_remaining(k);
        if (!row.active || row.level < 0.0) continue;
        const auto& v = vg.v[static_cast<std::size_t>(k)];
        const double v0 = v[0];
        for (std::size_t i = 0; i <= zero_idx; ++i) {
            const double expected = (g.at(i) - g.at(0)) * rep.slope;
            const double resid = std::fabs(v0 - v[i] - expected);
            rep.slope_max_residual = std::max(rep.slope_max_residual, resid);
        }
    }
    rep.slope_identity_pass = rep.slope_max_residual <= rep.slope_tolerance;

    // (d) quantile bounds on the principal-range levels, re-evaluated from
    // the demand model rather than read off the policy record
    const double np1 = p.q + pol.n0 + 1;
    rep.level_lower_bound = d.quantile((np1 * p.c_p - p.c) / (np1 * (p.c_p + p.c_h)));
    rep.level_upper_bound = d.quantile(p.c_p / (p.c_p + p.c_h));
    rep.bounds_checked_from_k = pol.n0 + 2;
    double pmin = std::numeric_limits<double>::infinity();
    double pmax = -pmin, amin = pmin, amax = -pmin;
    for (int k = 1; k <= pol.n; ++k) {
        const PolicyRow& row = pol.by_remaining(k);
        if (!row.active) continue;
        amin = std::min(amin, row.level);
        amax = std::max(amax, row.level);
        if (k >= rep.bounds_checked_from_k) {
            pmin = std::min(pmin, row.level);
            pmax = std::max(pmax, row.level);
        }
    }
    rep.all_active_min_level = std::isfinite(amin) ? amin : 0.0;
    rep.all_active_max_level = std::isfinite(amax) ? amax : 0.0;
    if (std::isfinite(pmin)) {
        rep.principal_min_level = pmin;
        rep.principal_max_level = pmax;
        rep.level_bounds_pass = pmin >= rep.level_lower_bound - 2.0 * h &&
                                pmax <= rep.level_upper_bound + 2.0 * h;
    }
    return rep;
}

}  // namespace invlab
