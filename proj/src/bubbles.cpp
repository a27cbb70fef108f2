#include "paneitz/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace paneitz {

double smoothstep_cutoff(double r, double delta) {
    if (!(delta > 0.0)) throw DomainError("cutoff radius must be positive");
    const double t = std::clamp((r - delta) / delta, 0.0, 1.0);
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

Eigen::VectorXd bubble_profile(const BubbleSpec& spec, const QuadratureRule& rule, int n) {
    if (!(spec.eps > 0.0)) throw DomainError("bubble scale eps must be positive");
    if (!(spec.delta > 0.0 && spec.delta <= 0.5 * std::numbers::pi)) throw DomainError("cutoff radius must lie in (0, pi/2]");
    const Eigen::VectorXd theta = rule.colatitudes();
    const double p = -0.5 * (n - 4);
    Eigen::VectorXd out(theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double r = spec.north ? theta(j) : std::numbers::pi - theta(j);
        out(j) = smoothstep_cutoff(r, spec.delta) * std::pow(r * r + spec.eps * spec.eps, p);
    }
    return out;
}

int required_degree(double eps) {
    if (!(eps > 0.0)) throw DomainError("bubble scale eps must be positive");
    return static_cast<int>(std::ceil(16.0 / eps - 1e-9));
}

BubbleField bubble_field(const BubbleSpec& spec, const ZonalBasis& basis, const OperatorCoefficients& coeffs) {
    const auto& rule = basis.rule();
    const Eigen::VectorXd raw = bubble_profile(spec, rule, coeffs.n);
    const int need = required_degree(spec.eps);
    if (basis.degree() < need) {
        throw DomainError("bubble eps = " + std::to_string(spec.eps) + " aliases at L = " +
                          std::to_string(basis.degree()) + "; use L >= " + std::to_string(need) +
                          " with q > L");
    }
    BubbleField b;
    b.phi = basis.project(raw);
    b.alias_error = (b.phi.values - raw).cwiseAbs().maxCoeff() / raw.cwiseAbs().maxCoeff();
    const double lnorm = std::pow(rule.weights.dot(b.phi.values.array().abs().pow(coeffs.N).matrix()), 1.0 / coeffs.N);
    b.c_norm = 1.0 / lnorm;
    b.v = basis.from_coeffs(b.c_norm * b.phi.coeffs);
    return b;
}

double functional_Y(const ZonalField& v, const OperatorCoefficients& coeffs, const ZonalBasis& basis) {
    const auto A = assemble_stiffness(coeffs, basis);
    const double den = basis.rule().weights.dot(v.values.array().abs().pow(coeffs.N).matrix());
    if (!(den > 0.0)) throw DomainError("Y of the zero field");
    return v.coeffs.dot(A.diag.cwiseProduct(v.coeffs)) / std::pow(den, 2.0 / coeffs.N);
}

std::vector<double> default_eps_grid() { return {0.05, 0.075, 0.1, 0.15, 0.2}; }

SweepReport epsilon_sweep(const EinsteinData& data, const std::vector<double>& eps_grid, double delta, int q, int L) {
    if (data.n <= 6) throw DomainError("epsilon sweep needs n > 6 (got n = " + std::to_string(data.n) + ")");
    if (eps_grid.size() < 3) throw DomainError("epsilon sweep needs at least 3 grid points");
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, q));
    ZonalBasis basis(rule, L);

    SweepReport rep;
    rep.n = data.n;
    rep.q = q;
    rep.L = L;
    rep.delta = delta;
    rep.K2_inv_sq = coeffs.K2_inv_sq;
    const int m = static_cast<int>(eps_grid.size());
    Eigen::MatrixXd M(m, 2);
    Eigen::VectorXd y(m), logc(m), loge(m);
    for (int i = 0; i < m; ++i) {
        BubbleSpec spec{eps_grid[i], delta, true};
        const auto b = bubble_field(spec, basis, coeffs);
        SweepRow row;
        row.eps = spec.eps;
        row.Y = functional_Y(b.v, coeffs, basis);
        row.Y_over_K = row.Y / coeffs.K2_inv_sq;
        row.c_norm = b.c_norm;
        row.alias_error = b.alias_error;
        row.below_sharp_constant = row.Y < coeffs.K2_inv_sq * (1.0 - 1e-10);
        rep.rows.push_back(row);
        M(i, 0) = 1.0;
        M(i, 1) = -spec.eps * spec.eps;
        y(i) = row.Y;
        loge(i) = std::log(spec.eps);
        logc(i) = std::log(b.c_norm);
    }
    const Eigen::Vector2d fit = M.colPivHouseholderQr().solve(y);
    rep.A = fit(0);
    rep.c_quadratic = fit(1);
    rep.residual = (M * fit - y).cwiseAbs().maxCoeff();
    rep.A_relative_error = std::abs(rep.A - coeffs.K2_inv_sq) / coeffs.K2_inv_sq;

    Eigen::MatrixXd P(m, 2);
    P.col(0).setOnes();
    P.col(1) = loge;
    rep.c_norm_exponent = P.colPivHouseholderQr().solve(logc)(1);
    return rep;
}

TwoPlaneBoundReport two_plane_bound(const EinsteinData& data, double mu1, const std::vector<double>& eps_grid, double delta,
                          int q, int L) {
    if (eps_grid.empty()) throw DomainError("two-plane bound needs at least one eps");
    if (!(mu1 > 0.0)) throw DomainError("mu1 must be positive");
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, q));
    ZonalBasis basis(rule, L);
    const auto A = assemble_stiffness(coeffs, basis);
    const double N = coeffs.N;
    const double n = data.n;

    TwoPlaneBoundReport rep;
    rep.n = data.n;
    rep.mu1 = mu1;
    rep.K2_inv_sq = coeffs.K2_inv_sq;
    rep.outside_hypothesis = data.n < 12;
    rep.target = std::pow(std::pow(mu1, n / 4.0) + std::pow(coeffs.K2_inv_sq, n / 4.0), 4.0 / n);

    // normalized constant: ||v||_N = 1
    const double vol = rule->weights.sum();
    Eigen::VectorXd cv = Eigen::VectorXd::Zero(basis.dimension());
    cv(0) = std::pow(vol, -1.0 / N) * std::sqrt(vol);
    const auto v = basis.from_coeffs(cv);

    for (double eps : eps_grid) {
        const auto b = bubble_field(BubbleSpec{eps, delta, true}, basis, coeffs);
        TwoPlaneRow row;
        row.eps = eps;
        row.Y = functional_Y(b.v, coeffs, basis);
        const Eigen::VectorXd ue = (std::pow(row.Y, 1.0 / (N - 2.0)) * b.v.values.array() +
                                    std::pow(mu1, 1.0 / (N - 2.0)) * v.values.array())
                                       .max(0.0)
                                       .matrix();
        const auto density = ConformalDensity::from_values(*rule, ue, N, false);
        const auto B = assemble_mass(density, basis, N);
        const double factor = std::pow(density.lN_mass(*rule, N), 4.0 / n);
        row.upper_bound = minimax_over_plane(A, B, b.v.coeffs, v.coeffs) * factor;
        // the smaller root of the same 2x2 pencil
        const Eigen::VectorXd& x1 = b.v.coeffs;
        const Eigen::VectorXd& x2 = v.coeffs;
        const double a11 = x1.dot(A.diag.cwiseProduct(x1)), a12 = x1.dot(A.diag.cwiseProduct(x2)),
                     a22 = x2.dot(A.diag.cwiseProduct(x2));
        const double b11 = x1.dot(B.B * x1), b12 = x1.dot(B.B * x2), b22 = x2.dot(B.B * x2);
        const double det_b = b11 * b22 - b12 * b12;
        const double det_a = a11 * a22 - a12 * a12;
        row.lower_value = det_a / det_b / (row.upper_bound / factor) * factor;
        rep.rows.push_back(row);
        if (rep.rows.size() == 1 || row.upper_bound < rep.best_bound) {
            rep.best_bound = row.upper_bound;
            rep.best_eps = eps;
        }
    }
    rep.ratio = rep.best_bound / rep.target;
    return rep;
}

ElementaryCheck elementary_inequality_check(double p, double C, int samples, std::uint64_t seed) {
    if (!(p > 2.0)) throw DomainError("elementary inequality needs p > 2");
    if (!(C > 0.0)) throw DomainError("constant C must be positive");
    if (samples < 1) throw DomainError("at least one sample is required");
    ElementaryCheck out;
    out.p = p;
    out.C = C;
    out.samples = samples;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logu(std::log(1e-6), std::log(1e6));
    for (int i = 0; i < samples; ++i) {
        const double x = std::exp(logu(rng));
        const double y = std::exp(logu(rng));
        const double lhs = std::pow(x + y, p);
        const double rhs = std::pow(x, p) + std::pow(y, p) + C * (std::pow(x, p - 1.0) * y + x * std::pow(y, p - 1.0));
        out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
        if (lhs > rhs * (1.0 + 1e-12)) ++out.violations;
    }
    return out;
}

} // namespace paneitz
