#pragma once

// Explicit eigenfunction constructions for the generalized pencil:
// the positive lift of a first eigenfield, the orthogonal pair spanning the
// second eigenspace, nodal profiles, and the |w| = u fixed-point residual.

#include "paneitz/spectral.hpp"

#include <vector>

namespace paneitz {

struct PositivityResult {
    ZonalField f;        // solves (Delta + alpha/2) f = |(Delta + alpha/2) v|
    ZonalField f_hat;    // k f with int u^{N-2} f_hat^2 = 1
    double k = 1.0;      // in (0, 1] when v is B-normalized
    double energy = 0.0; // int (Delta f_hat)^2 + alpha |grad f_hat|^2 + alpha_bar f_hat^2
    double lambda1 = 0.0;
    double gap = 0.0;        // energy - lambda1
    double min_margin = 0.0; // min over nodes of f - |v|
    bool direct = false;     // r had one sign, so f = +-v
};

/// Positive lift of a first eigenfield v with eigenvalue lambda1.
///
/// With r = Delta v + (alpha/2) v at the nodes: if r >= 0 everywhere then
/// f = v, if r <= 0 everywhere then f = -v; otherwise |r| is projected onto
/// `basis` and f_l = |r|_l / (mu_l + alpha/2). `mass_shift` is the shift
/// recorded by the eigensolver, so f_hat is normalized in the same pencil as v.
PositivityResult positivity_lift(const ZonalField& v, double lambda1, const OperatorCoefficients& coeffs,
                                 const ZonalBasis& basis, const ConformalDensity& density,
                                 double mass_shift = 0.0);

struct OrthogonalPair {
    double t = 0.0; // int u^{N-2} v s
    double alpha_c = 0.0;
    double beta_c = 1.0;
    ZonalField w; // alpha_c v + beta_c s
    double orthogonality = 0.0; // int u^{N-2} v w
    double normalization = 1.0; // int u^{N-2} w^2

    // The literature pair alpha = sqrt(t/(1-t)), beta = -1/sqrt((1-t)t),
    // defined only for 0 < t < 1.
    bool printed_defined = false;
    double printed_alpha = 0.0;
    double printed_beta = 0.0;
    double printed_orthogonality = 0.0;  // measured
    double printed_normalization = 0.0;  // measured; equals (1+t)/t
    double printed_defect_closed_form = 0.0; // (1+t)/t
};

/// Solves int u^{N-2} v w = 0, int u^{N-2} w^2 = 1 for w = alpha v + beta s
/// (beta > 0). v and s must be B-normalized with |t| < 1.
OrthogonalPair orthogonal_pair(const ZonalField& v, const ZonalField& s, const MassForm& mass,
                               const ZonalBasis& basis);

struct NodalProfile {
    int sign_changes = 0;
    double min_value = 0.0;
    double max_value = 0.0;
    std::vector<double> zero_crossings; // colatitudes, increasing
    double weighted_orthogonality = 0.0; // int u^{N-2} v w
    bool nodal() const { return sign_changes >= 1; }
};

/// Sign changes of w along theta in [0, pi], ignoring |w| <= dead_band * max|w|.
NodalProfile nodal_profile(const ZonalField& w, const ConformalDensity& density, const ZonalField& v,
                           const QuadratureRule& rule, double N, double dead_band = 1e-9);

/// || |w|/||w||_N - u/||u||_N ||_N over the nodes.
double fixed_point_residual(const ZonalField& w, const ConformalDensity& density, const QuadratureRule& rule,
                            double N);

} // namespace paneitz
