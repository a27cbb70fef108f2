#pragma once

// Reference values for tests, computed independently of the library
// (std::lgamma and 30-digit values frozen from an mpmath session).

#include <cmath>
#include <numbers>

namespace oracle {

inline double sphere_volume(int dim) {
    const double h = 0.5 * (dim + 1);
    return 2.0 * std::exp(h * std::log(std::numbers::pi) - std::lgamma(h));
}

/// int_{-1}^{1} x^k (1-x^2)^{(n-2)/2} dx.
inline double gegenbauer_moment(int n, int k) {
    if (k % 2 == 1) return 0.0;
    const double m = 0.5 * k;
    return std::exp(std::lgamma(m + 0.5) + std::lgamma(0.5 * n) - std::lgamma(m + 0.5 * (n + 1)));
}

/// Frozen high-precision values indexed by n in {5, 6, 8, 12}.
struct Frozen {
    int n;
    double vol;
    double k2_inv_sq;
    double gamma_formula;
    double sphere_volume_formula;
};

inline constexpr Frozen kFrozen[] = {
    {5, 31.006276680299820175, 102.38327344058293488, 229.60111555007632486, 89.801604953887380124},
    {6, 33.073361792319808187, 247.28444736616020538, 157.9136704174297379, 236.87050562614460685},
    {8, 29.686580124648361824, 653.82471182644695926, 39.478417604357434475, 683.78625093168676459},
    {12, 11.838173812182680898, 1914.4360194261035053, 0.54831135561607547882, 2117.6878650333560161},
};

// 59.0625 pi^{12/5}: second normalized eigenvalue of the constant density on S^5.
inline constexpr double kLambda2ConstS5 = 921.44946096524641393;

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace oracle
