#include "paneitz/zonal.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace paneitz {

double gegenbauer_beta(int n, int k) {
    const double dk = k;
    const double dn = n;
    return std::sqrt(dk * (dk + dn - 2.0) / ((2.0 * dk + dn - 1.0) * (2.0 * dk + dn - 3.0)));
}

namespace {

// Total mass of (1-x^2)^{(n-2)/2} on [-1, 1].
double weight_mass(int n) {
    return std::exp(0.5 * std::log(std::numbers::pi) + log_gamma(0.5 * n) - log_gamma(0.5 * (n + 1)));
}

struct RecurrenceValue {
    double p = 0.0;      // p_m(x)
    double dp = 0.0;     // p_m'(x)
    double sum_sq = 0.0; // sum_{k<m} p_k(x)^2
};

// Weight-orthonormal polynomials p_0..p_m at x.
RecurrenceValue run_recurrence(int n, int m, double x, double p0) {
    RecurrenceValue r;
    double prev = 0.0, dprev = 0.0;
    double cur = p0, dcur = 0.0;
    double beta_prev = 0.0;
    for (int k = 0; k < m; ++k) {
        r.sum_sq += cur * cur;
        const double beta = gegenbauer_beta(n, k + 1);
        const double next = (x * cur - beta_prev * prev) / beta;
        const double dnext = (cur + x * dcur - beta_prev * dprev) / beta;
        prev = cur;
        dprev = dcur;
        cur = next;
        dcur = dnext;
        beta_prev = beta;
    }
    r.p = cur;
    r.dp = dcur;
    return r;
}

} // namespace

Eigen::VectorXd QuadratureRule::colatitudes() const {
    return nodes.array().max(-1.0).min(1.0).acos().matrix();
}

QuadratureRule build_quadrature(const EinsteinData& data, int q) {
    if (q < 2) throw DomainError("quadrature needs at least 2 nodes, got " + std::to_string(q));
    const int n = data.n;
    const double mass = weight_mass(n);
    const double p0 = 1.0 / std::sqrt(mass);

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd sub(q - 1);
    for (int k = 1; k < q; ++k) sub(k - 1) = gegenbauer_beta(n, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    Eigen::VectorXd x = solver.eigenvalues();

    // One Newton step on p_q, then Christoffel weights 1 / sum_k p_k(x)^2.
    Eigen::VectorXd w(q);
    for (int j = 0; j < q; ++j) {
        const auto r = run_recurrence(n, q, x(j), p0);
        if (r.dp != 0.0) x(j) -= r.p / r.dp;
        w(j) = 1.0 / run_recurrence(n, q, x(j), p0).sum_sq;
    }
    // The weight is even: enforce exact antisymmetry of the nodes.
    for (int j = 0; j < q / 2; ++j) {
        const int k = q - 1 - j;
        const double xs = 0.5 * (x(k) - x(j));
        const double ws = 0.5 * (w(j) + w(k));
        x(j) = -xs;
        x(k) = xs;
        w(j) = w(k) = ws;
    }
    if (q % 2 == 1) x(q / 2) = 0.0;

    QuadratureRule rule;
    rule.n = n;
    rule.nodes = x;
    rule.weights = w * unit_sphere_volume(n - 1);
    return rule;
}

ZonalBasis::ZonalBasis(std::shared_ptr<const QuadratureRule> rule, int L) : rule_(std::move(rule)), L_(L) {
    if (!rule_) throw DomainError("basis needs a quadrature rule");
    if (L < 0) throw DomainError("basis degree must be nonnegative");
    if (L >= rule_->size()) {
        throw DomainError("basis degree L = " + std::to_string(L) + " must be below the node count q = " +
                          std::to_string(rule_->size()) + " (aliasing)");
    }
    const int n = rule_->n;
    const int q = rule_->size();
    norm_ = 1.0 / std::sqrt(unit_sphere_volume(n - 1));
    const double p0 = 1.0 / std::sqrt(weight_mass(n));

    eigs_.resize(L + 1);
    rec_.resize(L + 1);
    for (int l = 0; l <= L; ++l) {
        eigs_(l) = static_cast<double>(l) * (l + n - 1);
        rec_(l) = gegenbauer_beta(n, l + 1);
    }

    table_.resize(L + 1, q);
    table_.row(0).setConstant(p0);
    if (L >= 1) table_.row(1) = rule_->nodes.transpose().array() * table_.row(0).array() / rec_(0);
    for (int l = 1; l < L; ++l) {
        table_.row(l + 1) =
            (rule_->nodes.transpose().array() * table_.row(l).array() - rec_(l - 1) * table_.row(l - 1).array()) /
            rec_(l);
    }
    table_ *= norm_;
}

void ZonalBasis::check_coeffs(const Eigen::VectorXd& c) const {
    if (c.size() != dimension()) {
        throw DomainError("coefficient length " + std::to_string(c.size()) + " does not match basis dimension " +
                          std::to_string(dimension()));
    }
}

Eigen::VectorXd ZonalBasis::synthesize(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    return table_.transpose() * coeffs;
}

Eigen::VectorXd ZonalBasis::analyze(const Eigen::VectorXd& values) const {
    if (values.size() != rule_->size()) {
        throw DomainError("node value count " + std::to_string(values.size()) + " does not match rule size " +
                          std::to_string(rule_->size()));
    }
    return table_ * values.cwiseProduct(rule_->weights);
}

ZonalField ZonalBasis::from_coeffs(Eigen::VectorXd coeffs) const {
    ZonalField f;
    f.values = synthesize(coeffs);
    f.coeffs = std::move(coeffs);
    return f;
}

ZonalField ZonalBasis::project(const Eigen::VectorXd& values) const { return from_coeffs(analyze(values)); }

Eigen::VectorXd ZonalBasis::apply_laplacian(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    return eigs_.cwiseProduct(coeffs);
}

Eigen::VectorXd ZonalBasis::evaluate_at(double x) const {
    Eigen::VectorXd z(L_ + 1);
    z(0) = 1.0 / std::sqrt(weight_mass(rule_->n));
    if (L_ >= 1) z(1) = x * z(0) / rec_(0);
    for (int l = 1; l < L_; ++l) z(l + 1) = (x * z(l) - rec_(l - 1) * z(l - 1)) / rec_(l);
    return z * norm_;
}

} // namespace paneitz
