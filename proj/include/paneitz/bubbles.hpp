#pragma once

// Concentrated test functions on the round sphere and the bounds built from
// them.
//
//     phi_eps(theta) = eta(r) (r^2 + eps^2)^{-(n-4)/2},   r = theta or pi - theta,
//
// with eta a quintic smoothstep cutoff (1 on [0, delta], 0 on [2 delta, pi]).

#include "paneitz/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace paneitz {

struct BubbleSpec {
    double eps = 0.1;
    double delta = 0.5;
    bool north = true; // centre at theta = 0, otherwise theta = pi
};

/// eta(r): 1 on [0, delta], 0 on [2 delta, inf), C^2 quintic in between.
double smoothstep_cutoff(double r, double delta);

/// Raw phi_eps at the rule nodes.
Eigen::VectorXd bubble_profile(const BubbleSpec& spec, const QuadratureRule& rule, int n);

struct BubbleField {
    ZonalField phi;           // projection of phi_eps
    ZonalField v;             // c_norm * phi with int |v|^N = 1
    double c_norm = 0.0;      // normalization factor
    double alias_error = 0.0; // max |projection - raw| / max |raw| at the nodes
};

/// Degree needed to resolve a bubble of scale eps: eps * L >= 16.
int required_degree(double eps);

/// Projects phi_eps onto `basis` and normalizes in L^N. Rejects eps * L < 16
/// with a degree hint. `alias_error` is diagnostic only: Z_l(+-1) grows like
/// l^{(n-2)/2}, so the cutoff seams dominate the sup error at the poles for
/// broad profiles even when the energy is converged.
BubbleField bubble_field(const BubbleSpec& spec, const ZonalBasis& basis, const OperatorCoefficients& coeffs);

/// int v P v / (int |v|^N)^{2/N}.
double functional_Y(const ZonalField& v, const OperatorCoefficients& coeffs, const ZonalBasis& basis);

struct SweepRow {
    double eps = 0.0;
    double Y = 0.0;
    double Y_over_K = 0.0;
    double c_norm = 0.0;
    double alias_error = 0.0;
    bool below_sharp_constant = false; // Y < K2^{-2}: would contradict sharpness
};

struct SweepReport {
    int n = 0;
    int q = 0;
    int L = 0;
    double delta = 0.0;
    std::vector<SweepRow> rows;
    double A = 0.0;           // fitted limit of Y(eps) = A - C eps^2
    double c_quadratic = 0.0; // fitted C
    double residual = 0.0;    // max |fit - Y|
    double K2_inv_sq = 0.0;
    double A_relative_error = 0.0;  // |A - K2^{-2}| / K2^{-2}
    double c_norm_exponent = 0.0;   // slope of log c_norm against log eps
};

/// Default grid {0.05, 0.075, 0.1, 0.15, 0.2}.
std::vector<double> default_eps_grid();

/// Fits Y(eps) = A - C eps^2 on the grid. Needs n > 6 and at least 3 points.
SweepReport epsilon_sweep(const EinsteinData& data, const std::vector<double>& eps_grid, double delta = 0.5,
                          int q = 400, int L = 320);

struct TwoPlaneRow {
    double eps = 0.0;
    double Y = 0.0;
    double upper_bound = 0.0; // sup over span(v_eps, v) of the quotient times (int u_eps^N)^{4/n}
    double lower_value = 0.0; // the smaller 2x2 eigenvalue, same normalization
};

struct TwoPlaneBoundReport {
    int n = 0;
    double mu1 = 0.0;
    double K2_inv_sq = 0.0;
    double target = 0.0; // [mu1^{n/4} + K2^{-n/2}]^{4/n}
    std::vector<TwoPlaneRow> rows;
    double best_eps = 0.0;
    double best_bound = 0.0;
    double ratio = 0.0; // best_bound / target
    bool outside_hypothesis = false; // n < 12
};

/// u_eps = Y(v_eps)^{1/(N-2)} v_eps + mu1^{1/(N-2)} v with v the normalized
/// constant (the first minimizer on the round sphere); u_eps is clamped at 0.
TwoPlaneBoundReport two_plane_bound(const EinsteinData& data, double mu1, const std::vector<double>& eps_grid,
                          double delta = 0.5, int q = 400, int L = 320);

struct ElementaryCheck {
    double p = 0.0;
    double C = 0.0;
    int samples = 0;
    int violations = 0;
    double worst_ratio = 0.0; // max lhs / rhs
};

/// Counts (x, y), log-uniform in [1e-6, 1e6]^2, with
/// (x+y)^p > (x^p + y^p + C(x^{p-1} y + x y^{p-1})) (1 + 1e-12).
ElementaryCheck elementary_inequality_check(double p, double C, int samples, std::uint64_t seed = 0);

} // namespace paneitz
