#pragma once

// Economic primitives of the delayed-delivery inventory model: cost rates,
// the piecewise-linear carrying cost, and the passive-tail threshold scan.

#include <cmath>
#include <stdexcept>
#include <string>

namespace invlab {

// Model parameters. `x0` is the generalized starting inventory: negative
// values would mean starting in backlog, which the model rules out.
struct ModelParams {
    double c = 0.0;    // ordering cost per unit
    double c_h = 0.0;  // holding cost per unit per period
    double c_p = 0.0;  // backlog penalty per unit per period
    double q = 0.0;    // probability an order is filled immediately
    int n = 1;         // horizon length in periods
    double x0 = 0.0;   // initial inventory

    // `unchecked` skips the c < c_p ordering assumption so that the
    // contraction-coefficient formulas can be probed with artificial rates.
    void validate(bool unchecked = false) const {
        if (!(c > 0.0)) throw std::invalid_argument("params: ordering cost c must be positive");
        if (!unchecked && !(c < c_p))
            throw std::invalid_argument(
                "params: ordering cost c must be strictly smaller than the backlog penalty c_p");
        if (!(c_h > 0.0)) throw std::invalid_argument("params: holding cost c_h must be positive");
        if (!(c_p > 0.0)) throw std::invalid_argument("params: backlog penalty c_p must be positive");
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("params: q must lie in [0,1]");
        if (n < 1) throw std::invalid_argument("params: horizon n must be at least 1");
        if (!(x0 >= 0.0)) throw std::invalid_argument("params: initial inventory x0 must be >= 0");
    }
};

/// Carrying cost for one period: holding at rate c_h above zero stock,
/// backlog penalty at rate c_p below it.
inline double carrying_cost(double z, const ModelParams& p) {
    if (!std::isfinite(z)) throw std::domain_error("carrying_cost: non-finite inventory level");
    return z >= 0.0 ? p.c_h * z : -p.c_p * z;
}

enum class NaturalsConvention { ZeroBased, OneBased };

// Smallest j in N with c < c_p (q + j + 1). Under the zero-based reading of N
// this is 0 whenever c < c_p; the general scan stays in place so the formula
// can be exercised with rates where several steps are needed.
inline int compute_n0(const ModelParams& p,
                      NaturalsConvention conv = NaturalsConvention::ZeroBased) {
    if (!(p.c_p > 0.0)) throw std::invalid_argument("compute_n0: c_p must be positive");
    int j = (conv == NaturalsConvention::ZeroBased) ? 0 : 1;
    while (!(p.c < p.c_p * (p.q + j + 1))) {
        ++j;
        if (j > 1 << 20) throw std::runtime_error("compute_n0: scan failed to terminate");
    }
    return j;
}

}  // namespace invlab
