#pragma once

// Uniform state grid for the value recursion. The grid spans
// [-(n0+2) J, max(x0, s_cap)] where s_cap is the newsvendor-fractile quantile
// plus one step; the top of the grid doubles as the feasible order-up-to cap.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace invlab {

struct StateGrid {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double h = 0.0;
    std::size_t count = 0;  // abscissae, count = cells + 1

    static StateGrid build(double x_lo, double x_hi_raw, double h) {
        if (!(h > 0.0)) throw std::invalid_argument("grid: step must be positive");
        if (!(x_hi_raw > x_lo)) throw std::invalid_argument("grid: empty state range");
        StateGrid g;
        g.x_lo = x_lo;
        g.h = h;
        const auto cells =
            static_cast<std::size_t>(std::ceil((x_hi_raw - x_lo) / h - 1e-9));
        g.count = cells + 1;
        g.x_hi = x_lo + h * static_cast<double>(cells);
        return g;
    }

    [[nodiscard]] double at(std::size_t i) const { return x_lo + h * static_cast<double>(i); }

    /// Linear interpolation of a value row; arguments below the grid clamp to
    /// x_lo and bump `underflow` when provided.
    [[nodiscard]] double interp(const std::vector<double>& v, double x,
                                long* underflow = nullptr) const {
        if (x < x_lo) {
            if (underflow) ++(*underflow);
            return v.front();
        }
        if (x >= x_hi) return v.back();
        const double u = (x - x_lo) / h;
        auto i = static_cast<std::size_t>(u);
        if (i >= count - 1) i = count - 2;
        const double frac = u - static_cast<double>(i);
        return v[i] * (1.0 - frac) + v[i + 1] * frac;
    }
};

}  // namespace invlab
