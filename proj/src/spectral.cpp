#include "paneitz/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace paneitz {

namespace {

// First coefficient that is not round-off is made positive.
void fix_sign(Eigen::VectorXd& c) {
    const double scale = c.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (std::abs(c(i)) > 1e-12 * scale) {
            if (c(i) < 0.0) c = -c;
            return;
        }
    }
}

} // namespace

ConformalDensity ConformalDensity::from_root(const ZonalBasis& basis, Eigen::VectorXd coeffs, double N,
                                             bool normalize) {
    if (coeffs.cwiseAbs().maxCoeff() == 0.0) throw DomainError("density root q is identically zero");
    ConformalDensity d;
    Eigen::VectorXd q = basis.synthesize(coeffs);
    if (normalize) {
        const double mass = basis.rule().weights.dot(q.array().abs().pow(2.0 * N).matrix());
        if (!(mass > 0.0)) throw DomainError("density root vanishes at every node");
        const double s = std::pow(mass, -1.0 / (2.0 * N));
        coeffs *= s;
        q *= s;
        d.normalized = true;
    }
    d.u = q.array().square().matrix();
    d.root_coeffs = std::move(coeffs);
    return d;
}

ConformalDensity ConformalDensity::from_values(const QuadratureRule& rule, Eigen::VectorXd values, double N,
                                               bool normalize) {
    if (values.size() != rule.size()) throw DomainError("density node count does not match the rule");
    if (values.minCoeff() < 0.0) throw DomainError("density must be nonnegative at every node");
    if (values.maxCoeff() == 0.0) throw DomainError("density is identically zero (degenerate metric)");
    ConformalDensity d;
    d.u = std::move(values);
    if (normalize) {
        d.u *= std::pow(d.lN_mass(rule, N), -1.0 / N);
        d.normalized = true;
    }
    return d;
}

ConformalDensity ConformalDensity::constant(const QuadratureRule& rule, double N) {
    const double vol = rule.weights.sum();
    ConformalDensity d;
    d.u = Eigen::VectorXd::Constant(rule.size(), std::pow(vol, -1.0 / N));
    d.normalized = true;
    return d;
}

double ConformalDensity::lN_mass(const QuadratureRule& rule, double N) const {
    return rule.weights.dot(u.array().pow(N).matrix());
}

Eigen::VectorXd ConformalDensity::mass_weight(double N) const { return u.array().pow(N - 2.0).matrix(); }

ConformalDensity ConformalDensity::scaled(double c) const {
    if (!(c > 0.0)) throw DomainError("density scale must be positive");
    ConformalDensity d;
    d.u = u * c;
    if (root_coeffs) d.root_coeffs = *root_coeffs * std::sqrt(c);
    d.normalized = false;
    return d;
}

StiffnessForm assemble_stiffness(const OperatorCoefficients& coeffs, const ZonalBasis& basis) {
    if (coeffs.n != basis.dim_n()) {
        throw DomainError("coefficients for n = " + std::to_string(coeffs.n) + " but basis built for n = " +
                          std::to_string(basis.dim_n()));
    }
    StiffnessForm A;
    A.n = coeffs.n;
    const auto& mu = basis.laplacian_eigenvalues();
    A.diag.resize(mu.size());
    for (Eigen::Index l = 0; l < mu.size(); ++l) A.diag(l) = coeffs.symbol(mu(l));
    return A;
}

MassForm assemble_mass(const ConformalDensity& density, const ZonalBasis& basis, double N) {
    const auto& rule = basis.rule();
    if (density.u.size() != rule.size()) throw DomainError("density node count does not match the basis rule");
    if (density.u.minCoeff() < 0.0) throw DomainError("density must be nonnegative at every node");
    if (density.u.maxCoeff() == 0.0) throw DomainError("density vanishes at every node (degenerate metric)");
    const Eigen::VectorXd weight = rule.weights.cwiseProduct(density.mass_weight(N));
    const auto& T = basis.node_table();
    MassForm m;
    m.B = T * weight.asDiagonal() * T.transpose();
    return m;
}

double smallest_mass_eigenvalue(const MassForm& mass) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mass.B, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

GeneralizedSpectrum solve_generalized_eigen(const StiffnessForm& A, const MassForm& B, int k,
                                            const ZonalBasis& basis) {
    const Eigen::Index dim = A.diag.size();
    if (B.B.rows() != dim || B.B.cols() != dim) throw DomainError("stiffness and mass dimensions differ");
    if (k < 1 || k > dim) {
        throw DomainError("requested " + std::to_string(k) + " eigenpairs from a pencil of dimension " +
                          std::to_string(dim));
    }
    if (A.diag.minCoeff() <= 0.0) {
        throw DomainError("stiffness form is not positive definite (min entry " +
                          std::to_string(A.diag.minCoeff()) + "); the S <= 0 regime is not coercive");
    }

    GeneralizedSpectrum out;
    Eigen::MatrixXd Bsolved = B.B;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mass_es(B.B, Eigen::EigenvaluesOnly);
        const double top = mass_es.eigenvalues()(dim - 1);
        if (!(top > 0.0)) throw DomainError("mass form is zero");
        if (mass_es.eigenvalues()(0) <= 1e-13 * top) {
            out.shift = 1e-12 * B.B.trace() / static_cast<double>(dim);
            Bsolved.diagonal().array() += out.shift;
        }
    }

    const Eigen::VectorXd dinv = A.diag.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd C = dinv.asDiagonal() * Bsolved * dinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw std::runtime_error("reduced eigenproblem did not converge");

    out.eigenvalues.reserve(k);
    out.eigenfields.reserve(k);
    out.residuals.reserve(k);
    for (int i = 0; i < k; ++i) {
        const Eigen::Index col = dim - 1 - i;
        const double nu = es.eigenvalues()(col);
        if (!(nu > 0.0)) throw DomainError("eigenvalue " + std::to_string(i + 1) + " is infinite (B rank deficient)");
        Eigen::VectorXd v = dinv.cwiseProduct(es.eigenvectors().col(col));
        // B-orthonormalize against the previous fields; for large lambda
        // (small nu) this and the Rayleigh quotient below recover the
        // relative accuracy lost in the reduced problem.
        for (const auto& prev : out.eigenfields) v -= prev.coeffs.dot(Bsolved * v) * prev.coeffs;
        v /= std::sqrt(v.dot(Bsolved * v));
        fix_sign(v);
        const Eigen::VectorXd Av = A.diag.cwiseProduct(v);
        const double lambda = v.dot(Av);
        const double res = (Av - lambda * (Bsolved * v)).norm() / Av.norm();
        out.eigenvalues.push_back(lambda);
        out.residuals.push_back(res);
        out.eigenfields.push_back(basis.from_coeffs(std::move(v)));
    }
    return out;
}

double rayleigh(const StiffnessForm& A, const MassForm& B, const Eigen::VectorXd& v) {
    const double den = v.dot(B.B * v);
    if (!(den > 0.0)) throw DomainError("field lies in the null space of the mass form");
    return v.dot(A.diag.cwiseProduct(v)) / den;
}

double minimax_over_plane(const StiffnessForm& A, const MassForm& B, const Eigen::VectorXd& v,
                          const Eigen::VectorXd& w) {
    const Eigen::VectorXd Av = A.diag.cwiseProduct(v), Aw = A.diag.cwiseProduct(w);
    const Eigen::VectorXd Bv = B.B * v, Bw = B.B * w;
    const double a11 = v.dot(Av), a12 = v.dot(Aw), a22 = w.dot(Aw);
    const double b11 = v.dot(Bv), b12 = v.dot(Bw), b22 = w.dot(Bw);
    if (!(b11 > 0.0) || !(b22 > 0.0)) throw DomainError("plane member lies in the null space of the mass form");
    // det(Ahat - lambda Bhat) = c2 lambda^2 + c1 lambda + c0
    const double c2 = b11 * b22 - b12 * b12;
    const double c1 = -(a11 * b22 + a22 * b11 - 2.0 * a12 * b12);
    const double c0 = a11 * a22 - a12 * a12;
    if (!(c2 > 1e-14 * b11 * b22)) throw DomainError("plane is degenerate in the mass inner product");
    const double disc = std::max(c1 * c1 - 4.0 * c2 * c0, 0.0);
    // larger root; the form below avoids cancellation since c1 < 0
    return (-c1 + std::sqrt(disc)) / (2.0 * c2);
}

double normalized_invariant(double lambda, const ConformalDensity& density, const QuadratureRule& rule,
                            const OperatorCoefficients& coeffs) {
    return lambda * std::pow(density.lN_mass(rule, coeffs.N), 4.0 / coeffs.n);
}

DensitySpectrum density_spectrum(const OperatorCoefficients& coeffs, const ZonalBasis& basis,
                                 const ConformalDensity& density, int k) {
    DensitySpectrum out;
    const auto A = assemble_stiffness(coeffs, basis);
    const auto B = assemble_mass(density, basis, coeffs.N);
    out.spectrum = solve_generalized_eigen(A, B, k, basis);
    out.lN_mass = density.lN_mass(basis.rule(), coeffs.N);
    const double factor = std::pow(out.lN_mass, 4.0 / coeffs.n);
    for (double l : out.spectrum.eigenvalues) out.normalized.push_back(l * factor);
    return out;
}

} // namespace paneitz
