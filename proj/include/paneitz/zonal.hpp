#pragma once

// Zonal (rotationally symmetric) discretization of the round unit sphere S^n.
//
// A zonal function depends only on x = cos(theta), theta the colatitude from
// the north pole. Integrals reduce to
//
//     int_{S^n} f dv = omega_{n-1} int_{-1}^{1} f(x) (1 - x^2)^{(n-2)/2} dx,
//
// and the zonal harmonics are the Gegenbauer polynomials C_l^{(n-1)/2}(x),
// eigenfunctions of Delta = -div grad with eigenvalue l(l + n - 1).

#include "paneitz/einstein_core.hpp"

#include <Eigen/Dense>

#include <memory>

namespace paneitz {

/// Gauss rule for the Gegenbauer weight, scaled to the surface measure of S^n.
struct QuadratureRule {
    int n = 0;
    Eigen::VectorXd nodes;   // x_j = cos(theta_j), strictly increasing
    Eigen::VectorXd weights; // sum = Vol(S^n)

    int size() const { return static_cast<int>(nodes.size()); }
    double integrate(const Eigen::VectorXd& values) const { return weights.dot(values); }
    /// Colatitude theta_j = acos(x_j) (decreasing in j).
    Eigen::VectorXd colatitudes() const;
};

/// Gauss rule with q nodes, exact for polynomials of degree <= 2q - 1.
QuadratureRule build_quadrature(const EinsteinData& data, int q);

/// Coefficients plus node values of a zonal field in a particular basis.
struct ZonalField {
    Eigen::VectorXd coeffs;
    Eigen::VectorXd values;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// L2(S^n)-orthonormal zonal harmonics Z_0..Z_L tabulated on a rule.
class ZonalBasis {
public:
    ZonalBasis(std::shared_ptr<const QuadratureRule> rule, int L);

    int degree() const { return L_; }
    int dimension() const { return L_ + 1; }
    int dim_n() const { return rule_->n; }
    const QuadratureRule& rule() const { return *rule_; }
    std::shared_ptr<const QuadratureRule> rule_ptr() const { return rule_; }

    /// Laplacian eigenvalues mu_l = l(l + n - 1).
    const Eigen::VectorXd& laplacian_eigenvalues() const { return eigs_; }
    /// (L+1) x q table of Z_l(x_j).
    const Eigen::MatrixXd& node_table() const { return table_; }
    /// omega_{n-1}^{-1/2}: scales weight-orthonormal polynomials to Z_l.
    double norm_constant() const { return norm_; }

    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
    /// Quadrature projection c_l = sum_j w_j f(x_j) Z_l(x_j).
    Eigen::VectorXd analyze(const Eigen::VectorXd& values) const;

    ZonalField from_coeffs(Eigen::VectorXd coeffs) const;
    /// Projects node values; the cached values are the resynthesized projection.
    ZonalField project(const Eigen::VectorXd& values) const;

    /// Delta applied in coefficient space.
    Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& coeffs) const;

    /// Z_l evaluated at arbitrary x (three-term recurrence), l = 0..L.
    Eigen::VectorXd evaluate_at(double x) const;

private:
    void check_coeffs(const Eigen::VectorXd& c) const;

    std::shared_ptr<const QuadratureRule> rule_;
    int L_;
    double norm_ = 0.0;
    Eigen::VectorXd eigs_;
    Eigen::MatrixXd table_;
    Eigen::VectorXd rec_; // orthonormal recurrence coefficients beta_1..beta_{L}
};

/// Orthonormal recurrence coefficient beta_k for the weight (1-x^2)^{(n-2)/2}.
double gegenbauer_beta(int n, int k);

} // namespace paneitz
