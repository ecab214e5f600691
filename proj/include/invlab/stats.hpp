#pragma once

// Numeric statistics kit: normal distribution functions with reproducible
// rational approximations, sample moments, Kolmogorov-Smirnov distances,
// least-squares fitting, and empirical-CDF dominance with DKW bands.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace invlab {

// ============================================================================
// Error function and normal distribution
// ============================================================================

// Rational-approximation erfc after W. J. Cody's CALERF scheme.
// Three regimes stitched at |x| = 0.46875 and 4.0; absolute error of the
// resulting normal CDF is below 1e-15, so downstream KS values reproduce
// across platforms and languages to well under 1e-10.
inline double erfc_cody(double x) {
    static constexpr double kA[5] = {
        3.16112374387056560e+00, 1.13864154151050156e+02, 3.77485237685302021e+02,
        3.20937758913846947e+03, 1.85777706184603153e-01};
    static constexpr double kB[4] = {
        2.36012909523441209e+01, 2.44024637934444173e+02, 1.28261652607737228e+03,
        2.84423683343917062e+03};
    static constexpr double kC[9] = {
        5.64188496988670089e-01, 8.88314979438837594e+00, 6.61191906371416295e+01,
        2.98635138197400131e+02, 8.81952221241769090e+02, 1.71204761263407058e+03,
        2.05107837782607147e+03, 1.23033935479799725e+03, 2.15311535474403846e-08};
    static constexpr double kD[8] = {
        1.57449261107098347e+01, 1.17693950891312499e+02, 5.37181101862009858e+02,
        1.62138957456669019e+03, 3.29079923573345963e+03, 4.36261909014324716e+03,
        3.43936767414372164e+03, 1.23033935480374942e+03};
    static constexpr double kP[6] = {
        3.05326634961232344e-01, 3.60344899949804439e-01, 1.25781726111229246e-01,
        1.60837851487422766e-02, 6.58749161529837803e-04, 1.63153871373020978e-02};
    static constexpr double kQ[5] = {
        2.56852019228982242e+00, 1.87295284992346047e+00, 6.61191906371416295e-01,
        5.38168345707006855e-02, 2.33520497626869185e-03};
    static constexpr double kInvSqrtPi = 5.6418958354775628695e-01;

    const double y = std::fabs(x);
    double result;
    if (y <= 0.46875) {
        const double ysq = (y > 1.11e-16) ? y * y : 0.0;
        double xnum = kA[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + kA[i]) * ysq;
            xden = (xden + kB[i]) * ysq;
        }
        const double erf_val = x * (xnum + kA[3]) / (xden + kB[3]);
        return 1.0 - erf_val;
    } else if (y <= 4.0) {
        double xnum = kC[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + kC[i]) * y;
            xden = (xden + kD[i]) * y;
        }
        result = (xnum + kC[7]) / (xden + kD[7]);
    } else if (y < 26.543) {
        const double ysq = 1.0 / (y * y);
        double xnum = kP[5] * ysq;
        double xden = ysq;
        for (int i = 0; i < 4; ++i) {
            xnum = (xnum + kP[i]) * ysq;
            xden = (xden + kQ[i]) * ysq;
        }
        result = ysq * (xnum + kP[4]) / (xden + kQ[4]);
        result = (kInvSqrtPi - result) / y;
    } else {
        result = 0.0;
    }
    // exp(-y^2) split into a coarse and a fine factor to limit cancellation
    const double ysq16 = std::floor(y * 16.0) / 16.0;
    const double del = (y - ysq16) * (y + ysq16);
    result *= std::exp(-ysq16 * ysq16) * std::exp(-del);
    return (x < 0.0) ? 2.0 - result : result;
}

inline double erf_cody(double x) { return 1.0 - erfc_cody(x); }

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * erfc_cody(-x * 0.7071067811865475244);
}

inline double normal_pdf(double x) {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

// Inverse normal CDF: Acklam's rational initial guess polished by one
// Halley step against normal_cdf, good to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("normal_quantile: p must lie in [0,1]");
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();

    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double r = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double u = p - 0.5;
        const double r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double r = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }
    // Halley refinement
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

// ============================================================================
// Sample moments
// ============================================================================

struct SampleMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;          // Bessel-corrected
    double skewness = 0.0;          // m3 / m2^{3/2}
    double excess_kurtosis = 0.0;   // m4 / m2^2 - 3
    double min = 0.0;
    double max = 0.0;
};

inline SampleMoments sample_moments(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("sample_moments: empty sample");
    SampleMoments m;
    m.n = xs.size();
    double sum = 0.0;
    m.min = xs.front();
    m.max = xs.front();
    for (double x : xs) {
        sum += x;
        m.min = std::min(m.min, x);
        m.max = std::max(m.max, x);
    }
    const double n = static_cast<double>(xs.size());
    m.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.variance = (xs.size() > 1) ? m2 * n / (n - 1.0) : 0.0;
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

// ============================================================================
// Kolmogorov-Smirnov
// ============================================================================

/// One-sample KS distance of `xs` against a continuous CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf) {
    if (xs.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

// ============================================================================
// Ordinary least squares, y against x, with intercept
// ============================================================================

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols_fit: need two or more matched points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("ols_fit: degenerate abscissae");
    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (fit.intercept + fit.slope * x[i]);
            ssr += e * e;
        }
        fit.r2 = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
    } else {
        fit.r2 = 0.0;
    }
    return fit;
}

// ============================================================================
// Empirical CDFs, stochastic dominance, DKW bands
// ============================================================================

/// Two-sided DKW confidence half-width at level alpha for a sample of size n.
inline double dkw_epsilon(std::size_t n, double alpha = 0.05) {
    if (n == 0) throw std::invalid_argument("dkw_epsilon: empty sample");
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

enum class DominanceVerdict { Consistent, Violated, Inconclusive };

inline const char* to_string(DominanceVerdict v) {
    switch (v) {
        case DominanceVerdict::Consistent: return "CONSISTENT";
        case DominanceVerdict::Violated: return "VIOLATED";
        default: return "INCONCLUSIVE";
    }
}

struct DominanceReport {
    double violation = 0.0;      // max_t (F_B(t) - F_A(t)), clipped at 0
    double location = 0.0;       // argmax t over the pooled points
    double eps_a = 0.0;          // DKW half-width of sample A
    double eps_b = 0.0;
    DominanceVerdict verdict = DominanceVerdict::Inconclusive;
};

// Checks the hypothesis A <=_st B, i.e. F_A(t) >= F_B(t) for all t, on the
// pooled sample points. Bands that cover the whole unit interval make the
// comparison uninformative and yield INCONCLUSIVE.
inline DominanceReport stochastic_order_compare(std::vector<double> a,
                                                std::vector<double> b,
                                                double alpha = 0.05) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("stochastic_order_compare: empty sample");
    DominanceReport rep;
    rep.eps_a = dkw_epsilon(a.size(), alpha);
    rep.eps_b = dkw_epsilon(b.size(), alpha);

    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double worst = -1.0;
    double at = pooled.front();
    for (double t : pooled) {
        const double fa =
            static_cast<double>(std::upper_bound(a.begin(), a.end(), t) - a.begin()) / na;
        const double fb =
            static_cast<double>(std::upper_bound(b.begin(), b.end(), t) - b.begin()) / nb;
        if (fb - fa > worst) {
            worst = fb - fa;
            at = t;
        }
    }
    rep.violation = std::max(0.0, worst);
    rep.location = at;
    const double band = rep.eps_a + rep.eps_b;
    if (band >= 1.0)
        rep.verdict = DominanceVerdict::Inconclusive;
    else if (rep.violation <= band)
        rep.verdict = DominanceVerdict::Consistent;
    else
        rep.verdict = DominanceVerdict::Violated;
    return rep;
}

}  // namespace invlab
