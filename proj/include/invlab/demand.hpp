#pragma once

// Discretized bounded-support demand densities. A DemandModel carries the
// density and CDF sampled on an equally spaced grid over [0, J]; every
// integral downstream uses the composite trapezoid rule on this grid so that
// quadrature agrees bit-for-bit between the solver, the simulator's sampler,
// and the test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace invlab {

// ============================================================================
// Density descriptors
// ============================================================================

enum class DemandFamily { Uniform, Triangular, PolyBump, UniformMixture };

inline const char* to_string(DemandFamily f) {
    switch (f) {
        case DemandFamily::Uniform: return "uniform";
        case DemandFamily::Triangular: return "triangular";
        case DemandFamily::PolyBump: return "polybump";
        default: return "uniform_mixture";
    }
}

struct DemandSpec {
    DemandFamily family = DemandFamily::Uniform;
    double a = 0.0;     // support lower end (first segment for mixtures)
    double b = 1.0;     // support upper end (first segment for mixtures)
    double mode = 0.5;  // triangular mode
    double a2 = 0.0;    // second mixture segment
    double b2 = 0.0;
    double w1 = 0.5;    // mixture weight on the first segment
    int M = 512;        // trapezoid cells over [0, J]

    static DemandSpec uniform(double a, double b, int M = 0) {
        DemandSpec s;
        s.family = DemandFamily::Uniform;
        s.a = a;
        s.b = b;
        s.M = M > 0 ? M : default_cells(b);
        return s;
    }
    static DemandSpec triangular(double a, double mode, double b, int M = 0) {
        DemandSpec s;
        s.family = DemandFamily::Triangular;
        s.a = a;
        s.mode = mode;
        s.b = b;
        s.M = M > 0 ? M : default_cells(b);
        return s;
    }
    static DemandSpec polybump(double a, double b, int M = 0) {
        DemandSpec s;
        s.family = DemandFamily::PolyBump;
        s.a = a;
        s.b = b;
        s.M = M > 0 ? M : default_cells(b);
        return s;
    }
    static DemandSpec uniform_mixture(double a1, double b1, double a2, double b2,
                                      double w1 = 0.5, int M = 0) {
        DemandSpec s;
        s.family = DemandFamily::UniformMixture;
        s.a = a1;
        s.b = b1;
        s.a2 = a2;
        s.b2 = b2;
        s.w1 = w1;
        s.M = M > 0 ? M : default_cells(b2);
        return s;
    }

    // 512 cells per unit of support, floor of 64
    static int default_cells(double J) {
        return std::max(64, static_cast<int>(std::lround(512.0 * std::max(J, 0.125))));
    }

    [[nodiscard]] double support_hi() const {
        return family == DemandFamily::UniformMixture ? b2 : b;
    }
};

// ============================================================================
// DemandModel
// ============================================================================

struct DemandModel {
    DemandSpec spec;
    double J = 1.0;                  // least upper bound of the support
    double step = 0.0;               // grid spacing J / M
    std::vector<double> grid;        // M+1 abscissae on [0, J]
    std::vector<double> density;     // psi at the abscissae, trapezoid mass 1
    std::vector<double> cdf;         // cumulative trapezoid of psi
    std::vector<double> prob_weight; // trapezoid weight * density, sums to ~1
    double mean = 0.0;

    /// Piecewise-linear density, identically 0 outside [0, J].
    [[nodiscard]] double density_at(double t) const {
        if (t < 0.0 || t > J) return 0.0;
        const double u = t / step;
        const auto i = static_cast<std::size_t>(std::min(u, static_cast<double>(grid.size() - 2)));
        const double frac = u - static_cast<double>(i);
        return density[i] * (1.0 - frac) + density[i + 1] * frac;
    }

    [[nodiscard]] double cdf_at(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= J) return cdf.back();
        const double u = t / step;
        const auto i = static_cast<std::size_t>(std::min(u, static_cast<double>(grid.size() - 2)));
        const double frac = u - static_cast<double>(i);
        return cdf[i] * (1.0 - frac) + cdf[i + 1] * frac;
    }

    /// Right-continuous inverse: smallest grid-interpolated t with CDF(t) >= p.
    [[nodiscard]] double quantile(double p) const {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("quantile: p must lie in [0,1]");
        auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
        if (it == cdf.begin()) return grid.front();
        if (it == cdf.end()) return grid.back();
        const auto j = static_cast<std::size_t>(it - cdf.begin());
        const double lo = cdf[j - 1], hi = cdf[j];
        if (hi <= lo) return grid[j];
        return grid[j - 1] + step * (p - lo) / (hi - lo);
    }

    /// Inverse-CDF transform of a uniform variate in [0,1).
    [[nodiscard]] double sample(double u) const { return quantile(u); }
};

namespace detail {

inline double raw_density(const DemandSpec& s, double t) {
    switch (s.family) {
        case DemandFamily::Uniform:
            return (t >= s.a && t <= s.b) ? 1.0 / (s.b - s.a) : 0.0;
        case DemandFamily::Triangular: {
            if (t < s.a || t > s.b) return 0.0;
            const double h = 2.0 / (s.b - s.a);
            if (t <= s.mode)
                return s.mode > s.a ? h * (t - s.a) / (s.mode - s.a) : h;
            return s.b > s.mode ? h * (s.b - t) / (s.b - s.mode) : h;
        }
        case DemandFamily::PolyBump: {
            if (t < s.a || t > s.b) return 0.0;
            const double w = s.b - s.a;
            return 6.0 * (t - s.a) * (s.b - t) / (w * w * w);
        }
        case DemandFamily::UniformMixture: {
            double v = 0.0;
            if (t >= s.a && t <= s.b) v += s.w1 / (s.b - s.a);
            if (t >= s.a2 && t <= s.b2) v += (1.0 - s.w1) / (s.b2 - s.a2);
            return v;
        }
    }
    return 0.0;
}

}  // namespace detail

inline DemandModel make_demand(const DemandSpec& spec) {
    if (!(spec.a >= 0.0 && spec.a < spec.b))
        throw std::invalid_argument("demand: require 0 <= a < b");
    if (spec.family == DemandFamily::Triangular &&
        !(spec.mode >= spec.a && spec.mode <= spec.b))
        throw std::invalid_argument("demand: triangular mode must lie in [a,b]");
    if (spec.family == DemandFamily::UniformMixture) {
        if (!(spec.a2 >= 0.0 && spec.a2 < spec.b2))
            throw std::invalid_argument("demand: require 0 <= a2 < b2");
        if (!(spec.w1 > 0.0 && spec.w1 < 1.0))
            throw std::invalid_argument("demand: mixture weight must lie in (0,1)");
    }
    if (spec.M < 64) throw std::invalid_argument("demand: need at least 64 grid cells");

    DemandModel d;
    d.spec = spec;
    d.J = spec.support_hi();
    const std::size_t m = static_cast<std::size_t>(spec.M);
    d.step = d.J / static_cast<double>(m);
    d.grid.resize(m + 1);
    d.density.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        d.grid[i] = d.J * static_cast<double>(i) / static_cast<double>(m);
        d.density[i] = detail::raw_density(spec, d.grid[i]);
        if (d.density[i] < 0.0) throw std::invalid_argument("demand: negative density value");
    }
    // normalize the sampled values so the trapezoid mass is exactly one
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 <= m; ++i)
        mass += 0.5 * d.step * (d.density[i] + d.density[i + 1]);
    if (!(mass > 0.0)) throw std::invalid_argument("demand: density has no mass on [0,J]");
    for (auto& v : d.density) v /= mass;

    d.cdf.resize(m + 1);
    d.cdf[0] = 0.0;
    for (std::size_t i = 1; i <= m; ++i)
        d.cdf[i] = d.cdf[i - 1] + 0.5 * d.step * (d.density[i - 1] + d.density[i]);

    d.prob_weight.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        const double w = (i == 0 || i == m) ? 0.5 * d.step : d.step;
        d.prob_weight[i] = w * d.density[i];
    }
    d.mean = 0.0;
    for (std::size_t i = 0; i <= m; ++i) d.mean += d.prob_weight[i] * d.grid[i];
    return d;
}

// ============================================================================
// Soft unimodality
// ============================================================================

// A density is softly unimodal when, for every shift eps >= 0, the set where
// the density dominates its eps-shift is a half-line, up to regions where
// both are numerically zero. On the grid this reads: after discarding points
// where both values fall below 1e-12, the sign pattern of
// g(w) = psi(w) - psi(w + eps) is (<=0)* followed by (>=0)*.
struct UnimodalityEntry {
    double eps = 0.0;
    bool pass = false;
    double w_hat = 0.0;  // first abscissa after which g >= 0 throughout
};

struct UnimodalityReport {
    std::vector<UnimodalityEntry> per_eps;
    bool overall = true;
    bool empty_eps_warning = false;
};

inline UnimodalityReport check_soft_unimodality(const DemandModel& d,
                                                const std::vector<double>& eps_list) {
    constexpr double kTol = 1e-12;
    UnimodalityReport rep;
    if (eps_list.empty()) {
        rep.overall = true;
        rep.empty_eps_warning = true;
        return rep;
    }
    const std::size_t m = d.grid.size() - 1;
    for (double eps : eps_list) {
        if (!(eps >= 0.0))
            throw std::domain_error("check_soft_unimodality: shifts must be >= 0");
        UnimodalityEntry entry;
        entry.eps = eps;
        // scan the grid extended to [-J, 2J]
        long first_pos = -1, last_neg = -1;
        std::vector<std::pair<long, double>> kept;  // (index, g)
        const long lo = -static_cast<long>(m), hi = 2 * static_cast<long>(m);
        kept.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (long j = lo; j <= hi; ++j) {
            const double w = d.step * static_cast<double>(j);
            const double p0 = d.density_at(w);
            const double p1 = d.density_at(w + eps);
            if (p0 < kTol && p1 < kTol) continue;
            const double g = p0 - p1;
            const long idx = static_cast<long>(kept.size());
            kept.emplace_back(j, g);
            if (g > kTol && first_pos < 0) first_pos = idx;
            if (g < -kTol) last_neg = idx;
        }
        entry.pass = (last_neg < 0) || (first_pos < 0) || (last_neg < first_pos);
        if (!kept.empty()) {
            const long start = entry.pass ? last_neg + 1
                                          : static_cast<long>(kept.size());
            if (start >= 0 && start < static_cast<long>(kept.size()))
                entry.w_hat = d.step * static_cast<double>(kept[static_cast<std::size_t>(start)].first);
            else
                entry.w_hat = d.step * static_cast<double>(kept.back().first);
        }
        rep.overall = rep.overall && entry.pass;
        rep.per_eps.push_back(entry);
    }
    return rep;
}

/// Trapezoid integral of max(psi(w) - psi(w + eps), 0) over the extended
/// grid; the total-variation distance between a kernel row and its
/// eps-shifted copy.
inline double tv_shift(const DemandModel& d, double eps) {
    if (!(eps >= 0.0)) throw std::domain_error("tv_shift: shift must be >= 0");
    const long m = static_cast<long>(d.grid.size() - 1);
    double acc = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    for (long j = -m; j <= 2 * m; ++j) {
        const double w = d.step * static_cast<double>(j);
        const double g = std::max(d.density_at(w) - d.density_at(w + eps), 0.0);
        if (have_prev) acc += 0.5 * d.step * (prev + g);
        prev = g;
        have_prev = true;
    }
    return acc;
}

}  // namespace invlab
