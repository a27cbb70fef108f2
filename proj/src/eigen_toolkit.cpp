#include "paneitz/eigen_toolkit.hpp"

#include <cmath>
#include <limits>

namespace paneitz {

namespace {

double lN_norm(const Eigen::VectorXd& values, const QuadratureRule& rule, double N) {
    return std::pow(rule.weights.dot(values.array().abs().pow(N).matrix()), 1.0 / N);
}

} // namespace

PositivityResult positivity_lift(const ZonalField& v, double lambda1, const OperatorCoefficients& coeffs,
                                 const ZonalBasis& basis, const ConformalDensity& density,
                                 double mass_shift) {
    if (coeffs.curvature_flagged || !(coeffs.alpha > 0.0)) {
        throw DomainError("positivity lift needs positive scalar curvature (alpha > 0)");
    }
    auto mass = assemble_mass(density, basis, coeffs.N);
    mass.B.diagonal().array() += mass_shift;
    const double vnorm = v.coeffs.dot(mass.B * v.coeffs);
    if (!(vnorm > 0.0)) throw DomainError("field has zero weighted norm");

    const Eigen::ArrayXd shifted = basis.laplacian_eigenvalues().array() + 0.5 * coeffs.alpha;
    const Eigen::VectorXd r = basis.synthesize((shifted * v.coeffs.array()).matrix());

    PositivityResult out;
    out.lambda1 = lambda1;
    if (r.minCoeff() >= 0.0) {
        out.f = v;
        out.direct = true;
    } else if (r.maxCoeff() <= 0.0) {
        out.f = basis.from_coeffs(-v.coeffs);
        out.direct = true;
    } else {
        const Eigen::VectorXd rl = basis.analyze(r.cwiseAbs());
        out.f = basis.from_coeffs((rl.array() / shifted).matrix());
    }
    out.min_margin = (out.f.values - v.values.cwiseAbs()).minCoeff();

    const double fnorm = out.f.coeffs.dot(mass.B * out.f.coeffs);
    out.k = 1.0 / std::sqrt(fnorm);
    out.f_hat = basis.from_coeffs(out.k * out.f.coeffs);
    const auto A = assemble_stiffness(coeffs, basis);
    out.energy = out.f_hat.coeffs.dot(A.diag.cwiseProduct(out.f_hat.coeffs));
    out.gap = out.energy - lambda1;
    return out;
}

OrthogonalPair orthogonal_pair(const ZonalField& v, const ZonalField& s, const MassForm& mass,
                               const ZonalBasis& basis) {
    const Eigen::VectorXd Bv = mass.B * v.coeffs;
    const Eigen::VectorXd Bs = mass.B * s.coeffs;
    const double vv = v.coeffs.dot(Bv), ss = s.coeffs.dot(Bs);
    if (std::abs(vv - 1.0) > 1e-8 || std::abs(ss - 1.0) > 1e-8) {
        throw DomainError("orthogonal pair needs B-normalized inputs (got norms " + std::to_string(vv) + ", " +
                          std::to_string(ss) + ")");
    }
    OrthogonalPair p;
    p.t = v.coeffs.dot(Bs);
    if (!(std::abs(p.t) < 1.0)) {
        throw DomainError("|t| >= 1: v and s are proportional in the weighted inner product");
    }
    const double root = std::sqrt((1.0 - p.t) * (1.0 + p.t));
    p.alpha_c = -p.t / root;
    p.beta_c = 1.0 / root;
    p.w = basis.from_coeffs(p.alpha_c * v.coeffs + p.beta_c * s.coeffs);
    p.orthogonality = v.coeffs.dot(mass.B * p.w.coeffs);
    p.normalization = p.w.coeffs.dot(mass.B * p.w.coeffs);

    if (p.t > 0.0) {
        p.printed_defined = true;
        p.printed_alpha = std::sqrt(p.t / (1.0 - p.t));
        p.printed_beta = -1.0 / std::sqrt((1.0 - p.t) * p.t);
        const Eigen::VectorXd wp = p.printed_alpha * v.coeffs + p.printed_beta * s.coeffs;
        p.printed_orthogonality = v.coeffs.dot(mass.B * wp);
        p.printed_normalization = wp.dot(mass.B * wp);
        p.printed_defect_closed_form = (1.0 + p.t) / p.t;
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        p.printed_alpha = p.printed_beta = p.printed_orthogonality = p.printed_normalization = nan;
        p.printed_defect_closed_form = nan;
    }
    return p;
}

NodalProfile nodal_profile(const ZonalField& w, const ConformalDensity& density, const ZonalField& v,
                           const QuadratureRule& rule, double N, double dead_band) {
    const Eigen::VectorXd& x = w.values;
    if (x.size() != rule.size()) throw DomainError("field node count does not match the rule");
    const double scale = x.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw DomainError("nodal profile of the zero field");

    NodalProfile p;
    p.min_value = x.minCoeff();
    p.max_value = x.maxCoeff();
    const Eigen::VectorXd theta = rule.colatitudes();
    // nodes are ordered by increasing x, i.e. decreasing theta
    int last = -1;
    for (int j = rule.size() - 1; j >= 0; --j) {
        if (std::abs(x(j)) <= dead_band * scale) continue;
        if (last >= 0 && (x(j) > 0.0) != (x(last) > 0.0)) {
            ++p.sign_changes;
            const double s = x(last) / (x(last) - x(j));
            p.zero_crossings.push_back(theta(last) + s * (theta(j) - theta(last)));
        }
        last = j;
    }
    const Eigen::VectorXd weight = rule.weights.cwiseProduct(density.mass_weight(N));
    p.weighted_orthogonality = weight.dot(v.values.cwiseProduct(x));
    return p;
}

double fixed_point_residual(const ZonalField& w, const ConformalDensity& density, const QuadratureRule& rule,
                            double N) {
    const double wn = lN_norm(w.values, rule, N);
    const double un = lN_norm(density.u, rule, N);
    if (!(wn > 0.0) || !(un > 0.0)) throw DomainError("fixed-point residual of a zero field");
    const Eigen::VectorXd diff = w.values.cwiseAbs() / wn - density.u / un;
    return lN_norm(diff, rule, N);
}

} // namespace paneitz
