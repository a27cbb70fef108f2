#pragma once

// Closed-form constants of the Paneitz-Branson operator on Einstein manifolds.
//
// On an Einstein manifold (Ric = (S/n) g) the operator reduces to the
// constant-coefficient form
//
//     P u = Delta^2 u + alpha Delta u + alpha_bar u,      Delta = -div grad,
//
// which factors as (Delta + a)(Delta + b) with a + b = alpha, a b = alpha_bar.
// Every constant in this header is a pure function of (n, S).

#include <stdexcept>
#include <string>

namespace paneitz {

/// Raised when an input violates a documented precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Natural log of the Gamma function for x > 0 (Lanczos, g = 7, 9 terms).
double log_gamma(double x);
/// Gamma function; reflection formula below 1/2.
double gamma_fn(double x);

/// Volume of the unit sphere S^dim embedded in R^{dim+1}.
double unit_sphere_volume(int dim);

struct EinsteinData {
    int n = 5;
    double S = 20.0;
    double vol = 0.0;   // volume of the round unit S^n, cached
    bool round = false; // S == n(n-1) exactly

    /// Round unit sphere: S = n(n-1).
    static EinsteinData round_sphere(int n);
    /// Arbitrary scalar curvature on the unit-sphere geometry.
    static EinsteinData with_curvature(int n, double S);

    /// S > 0 is required by every construction that needs coercivity.
    bool positive_curvature() const { return S > 0.0; }
};

struct OperatorCoefficients {
    int n = 0;
    double alpha = 0.0;
    double alpha_bar = 0.0;
    double a = 0.0; // smaller root of x^2 - alpha x + alpha_bar
    double b = 0.0;
    double N = 0.0; // critical exponent 2n/(n-4)
    double K2_inv_sq = 0.0;
    bool curvature_flagged = false; // S <= 0

    /// Symbol of P on an eigenfunction of Delta with eigenvalue mu.
    double symbol(double mu) const { return (mu + a) * (mu + b); }
};

OperatorCoefficients derive_coefficients(const EinsteinData& data);

/// Q-curvature of an Einstein metric (Delta S = 0, |Ric|^2 = S^2/n).
double q_curvature_einstein(const EinsteinData& data);

/// Both sides of alpha^2/4 - alpha_bar = S^2/(n^2 (n-1)^2).
struct DiscriminantCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double relative_error = 0.0;
};
DiscriminantCheck discriminant_identity(const EinsteinData& data);

/// Competing closed forms for the sharp Sobolev constant K2^{-2}.
///
/// `oracle` is the constant-function value of the sphere quotient
/// int uPu / (int |u|^N)^{2/N}, i.e. alpha_bar_round * Vol(S^n)^{4/n}, and is
/// the canonical value used everywhere else. The two literature formulas are
/// evaluated exactly as printed; `corrected_formula` is an algebraically
/// equivalent rewrite of the oracle via the Gamma duplication formula.
struct SharpConstantReport {
    int n = 0;
    double oracle = 0.0;
    double gamma_ratio_formula = 0.0;   // pi^2 n(n-1)(n^2-4) Gamma(n/2)/Gamma(n)
    double sphere_volume_formula = 0.0; // n(n+2)(n-2)(n-4)/16 * omega_{n-1}^{4/n}
    double corrected_formula = 0.0;     // pi^2 n(n-4)(n^2-4) [Gamma(n/2)/Gamma(n)]^{4/n}
    double ratio_gamma_to_oracle = 0.0;
    double ratio_volume_to_oracle = 0.0;
    double ratio_gamma_to_volume = 0.0;
    double ratio_corrected_to_oracle = 0.0;

    /// Printed formulas disagreeing with the oracle by more than `tol`.
    bool discrepancy(double tol = 1e-6) const;
    std::string summary() const;
};

SharpConstantReport sharp_constant_report(const EinsteinData& data);

/// Canonical K2^{-2} for dimension n (the oracle).
double sharp_constant_inv_sq(int n);

} // namespace paneitz
