#pragma once

// Generalized eigenvalues of the Paneitz operator against a conformal density.
//
// For a density u >= 0 on S^n the k-th generalized eigenvalue is the minimax
// value of the quotient int v P v / int u^{N-2} v^2 over k-dimensional spaces.
// In the zonal basis the numerator is the diagonal form A and the denominator
// is the dense Gram-type form B(u).

#include "paneitz/einstein_core.hpp"
#include "paneitz/zonal.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace paneitz {

/// A nonnegative zonal density u with u^{N-2} g the generalized metric.
struct ConformalDensity {
    Eigen::VectorXd u;                          // node values
    std::optional<Eigen::VectorXd> root_coeffs; // q coefficients when u = q^2
    bool normalized = false;                    // int u^N = 1

    /// u = q^2 with q = sum_l c_l Z_l. Rescales c so int u^N = 1 when `normalize`.
    static ConformalDensity from_root(const ZonalBasis& basis, Eigen::VectorXd coeffs, double N,
                                      bool normalize = true);
    /// Arbitrary nonnegative node values.
    static ConformalDensity from_values(const QuadratureRule& rule, Eigen::VectorXd values, double N,
                                        bool normalize = false);
    /// The normalized constant density Vol^{-1/N}.
    static ConformalDensity constant(const QuadratureRule& rule, double N);

    /// int u^N dv.
    double lN_mass(const QuadratureRule& rule, double N) const;
    /// u^{N-2} at the nodes.
    Eigen::VectorXd mass_weight(double N) const;
    ConformalDensity scaled(double c) const;
};

/// Diagonal stiffness: A_l = mu_l^2 + alpha mu_l + alpha_bar = (mu_l + a)(mu_l + b).
struct StiffnessForm {
    int n = 0;
    Eigen::VectorXd diag;
};

struct MassForm {
    Eigen::MatrixXd B;
};

StiffnessForm assemble_stiffness(const OperatorCoefficients& coeffs, const ZonalBasis& basis);
MassForm assemble_mass(const ConformalDensity& density, const ZonalBasis& basis, double N);

/// Smallest eigenvalue of B, used to diagnose degenerate generalized metrics.
double smallest_mass_eigenvalue(const MassForm& mass);

struct GeneralizedSpectrum {
    std::vector<double> eigenvalues;     // ascending
    std::vector<ZonalField> eigenfields; // B-orthonormal
    std::vector<double> residuals;       // |A v - lambda B v| / |A v|
    double shift = 0.0;                  // delta added to B when B is singular
};

/// Smallest k eigenpairs of the pencil (A, B).
///
/// Reduction uses the congruence A = D^2 (A is diagonal and positive), so the
/// reduced matrix D^{-1} B D^{-1} stays bounded even when B is nearly
/// singular; lambda_i = 1 / nu_i for its largest eigenvalues nu_i. If B is
/// numerically singular it is replaced by B + delta I with
/// delta = 1e-12 trace(B)/dim and delta is recorded.
GeneralizedSpectrum solve_generalized_eigen(const StiffnessForm& A, const MassForm& B, int k,
                                            const ZonalBasis& basis);

/// int v P v / int u^{N-2} v^2 in coefficient space.
double rayleigh(const StiffnessForm& A, const MassForm& B, const Eigen::VectorXd& v);

/// sup of the Rayleigh quotient over span(v, w): larger root of the 2x2 pencil.
double minimax_over_plane(const StiffnessForm& A, const MassForm& B, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& w);

/// lambda_k(u) (int u^N)^{4/n}; invariant under u -> c u.
double normalized_invariant(double lambda, const ConformalDensity& density, const QuadratureRule& rule,
                            const OperatorCoefficients& coeffs);

/// Convenience bundle: assemble both forms for a density and solve.
struct DensitySpectrum {
    GeneralizedSpectrum spectrum;
    std::vector<double> normalized; // lambda-bar_k per eigenvalue
    double lN_mass = 0.0;
};
DensitySpectrum density_spectrum(const OperatorCoefficients& coeffs, const ZonalBasis& basis,
                                 const ConformalDensity& density, int k);

} // namespace paneitz
