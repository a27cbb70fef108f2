#include "paneitz/sobolev_audit.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace paneitz {

namespace {

constexpr double kVerdictTol = 1e-10;
constexpr double kTailTol = 1e-8;

double lN_norm_sq(const Eigen::VectorXd& values, const QuadratureRule& rule, double N) {
    return std::pow(rule.weights.dot(values.array().abs().pow(N).matrix()), 2.0 / N);
}

std::string describe(const RadialProfile& p) { return p.name; }

void require_size(const ZonalBasis& basis, const Eigen::VectorXd& c) {
    if (c.size() != basis.dimension()) throw DomainError("field degree does not match the basis");
}

// Tail fraction of |f|^N beyond R, evaluated with a grid built for that R.
double tail_fraction_at(const RadialProfile& p, int n, double R, double N) {
    return tail_fraction(p, build_radial_grid(n, R), N);
}

void require_decay(const RadialProfile& p, const EuclideanRadialGrid& grid, double N) {
    const double frac = tail_fraction(p, grid, N);
    if (frac < kTailTol) return;
    double R = grid.R;
    for (int j = 0; j < 24 && tail_fraction_at(p, grid.n, R, N) >= kTailTol; ++j) R *= 2.0;
    std::ostringstream os;
    os << "profile '" << p.name << "' carries L^N tail fraction " << frac << " beyond R = " << grid.R
       << "; use R >= " << R;
    throw DomainError(os.str());
}

} // namespace

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Boundary: return "boundary";
    }
    return "unknown";
}

InequalityReport make_report(std::string name, double lhs, double rhs, Relation rel, std::string fingerprint) {
    InequalityReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.relation = rel;
    r.fingerprint = std::move(fingerprint);
    if (rhs == 0.0) {
        r.ratio = lhs == 0.0 ? 1.0 : std::copysign(std::numeric_limits<double>::infinity(), lhs);
        if (lhs == 0.0) {
            r.verdict = Verdict::Boundary;
        } else {
            const bool holds = (rel == Relation::LessEqual) ? lhs < 0.0 : lhs > 0.0;
            r.verdict = holds ? Verdict::Holds : Verdict::Violated;
        }
        return r;
    }
    r.ratio = lhs / rhs;
    const double below = 1.0 - kVerdictTol, above = 1.0 + kVerdictTol;
    if (rel == Relation::LessEqual) {
        r.verdict = r.ratio < below ? Verdict::Holds : (r.ratio > above ? Verdict::Violated : Verdict::Boundary);
    } else {
        r.verdict = r.ratio > above ? Verdict::Holds : (r.ratio < below ? Verdict::Violated : Verdict::Boundary);
    }
    return r;
}

void gauss_legendre(int m, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    if (m < 1) throw DomainError("Gauss-Legendre rule needs at least one node");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m), sub(std::max(m - 1, 0));
    for (int k = 1; k < m; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    nodes = es.eigenvalues();
    weights = 2.0 * es.eigenvectors().row(0).transpose().array().square().matrix();
}

EuclideanRadialGrid build_radial_grid(int n, double R, int per_panel, int tail_nodes) {
    if (n < 5) throw DomainError("Euclidean audits need n >= 5");
    if (!(R > 1.0)) throw DomainError("truncation radius must exceed 1");
    if (per_panel < 4 || tail_nodes < 4) throw DomainError("radial grid needs at least 4 nodes per panel");

    std::vector<double> edges{0.0, 0.25, 0.5, 1.0};
    while (edges.back() * 2.0 < R) edges.push_back(edges.back() * 2.0);
    edges.push_back(R);

    Eigen::VectorXd x, w;
    gauss_legendre(per_panel, x, w);
    Eigen::VectorXd xt, wt;
    gauss_legendre(tail_nodes, xt, wt);

    const int panels = static_cast<int>(edges.size()) - 1;
    EuclideanRadialGrid g;
    g.n = n;
    g.R = R;
    g.inner = panels * per_panel;
    g.r.resize(g.inner + tail_nodes);
    g.weights.resize(g.inner + tail_nodes);
    const double omega = unit_sphere_volume(n - 1);
    int j = 0;
    for (int p = 0; p < panels; ++p) {
        const double lo = edges[p], hi = edges[p + 1], half = 0.5 * (hi - lo);
        for (int i = 0; i < per_panel; ++i, ++j) {
            const double r = lo + half * (x(i) + 1.0);
            g.r(j) = r;
            g.weights(j) = omega * std::pow(r, n - 1) * half * w(i);
        }
    }
    // r = R / t, t in (0, 1): dr = R / t^2 dt
    for (int i = 0; i < tail_nodes; ++i, ++j) {
        const double t = 0.5 * (xt(i) + 1.0);
        const double r = R / t;
        g.r(j) = r;
        g.weights(j) = omega * std::pow(r, n - 1) * (R / (t * t)) * 0.5 * wt(i);
    }
    return g;
}

RadialProfile euclidean_bubble(int n, double scale) {
    if (!(scale > 0.0)) throw DomainError("bubble scale must be positive");
    const double k = 0.5 * (n - 4);
    RadialProfile p;
    p.name = "bubble(s=" + std::to_string(scale) + ")";
    p.f = [k, scale](double r) {
        const double s = r / scale;
        return std::pow(1.0 + s * s, -k);
    };
    p.d1 = [k, scale](double r) {
        const double s = r / scale;
        return -2.0 * k * s * std::pow(1.0 + s * s, -k - 1.0) / scale;
    };
    p.d2 = [k, scale](double r) {
        const double s = r / scale, t = 1.0 + s * s;
        return (-2.0 * k * std::pow(t, -k - 1.0) + 4.0 * k * (k + 1.0) * s * s * std::pow(t, -k - 2.0)) /
               (scale * scale);
    };
    return p;
}

RadialProfile core_bump(double a) {
    if (!(a > 0.0)) throw DomainError("bump radius must be positive");
    RadialProfile p;
    p.name = "core(" + std::to_string(a) + ")";
    p.f = [a](double r) {
        if (r >= a) return 0.0;
        const double s = 1.0 - (r / a) * (r / a);
        return s * s * s;
    };
    p.d1 = [a](double r) {
        if (r >= a) return 0.0;
        const double s = 1.0 - (r / a) * (r / a);
        return -6.0 * r / (a * a) * s * s;
    };
    p.d2 = [a](double r) {
        if (r >= a) return 0.0;
        const double a2 = a * a, s = 1.0 - r * r / a2;
        return -6.0 / a2 * s * s + 24.0 * r * r / (a2 * a2) * s;
    };
    return p;
}

RadialProfile shell_bump(double r0, double r1) {
    if (!(r0 >= 0.0) || !(r1 > r0)) throw DomainError("shell needs 0 <= r0 < r1");
    const double h = r1 - r0;
    RadialProfile p;
    p.name = "shell(" + std::to_string(r0) + "," + std::to_string(r1) + ")";
    p.f = [r0, h](double r) {
        const double t = (r - r0) / h;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        const double s = t * (1.0 - t);
        return 64.0 * s * s * s;
    };
    p.d1 = [r0, h](double r) {
        const double t = (r - r0) / h;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        const double s = t * (1.0 - t);
        return 192.0 * s * s * (1.0 - 2.0 * t) / h;
    };
    p.d2 = [r0, h](double r) {
        const double t = (r - r0) / h;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        const double s = t * (1.0 - t), ds = 1.0 - 2.0 * t;
        return (384.0 * s * ds * ds - 384.0 * s * s) / (h * h);
    };
    return p;
}

Eigen::VectorXd radial_laplacian(const RadialProfile& p, const EuclideanRadialGrid& grid) {
    Eigen::VectorXd out(grid.r.size());
    for (Eigen::Index j = 0; j < grid.r.size(); ++j) {
        const double r = grid.r(j);
        out(j) = -p.d2(r) - (grid.n - 1) * p.d1(r) / r;
    }
    return out;
}

double tail_fraction(const RadialProfile& p, const EuclideanRadialGrid& grid, double N) {
    double inner = 0.0, tail = 0.0;
    for (Eigen::Index j = 0; j < grid.r.size(); ++j) {
        const double m = grid.weights(j) * std::pow(std::abs(p.f(grid.r(j))), N);
        (j < grid.inner ? inner : tail) += m;
    }
    const double total = inner + tail;
    if (!(total > 0.0)) throw DomainError("profile '" + p.name + "' vanishes on the grid");
    return tail / total;
}

namespace {

struct RadialSamples {
    Eigen::VectorXd u;  // normalized so that int u^N = 1
    double uN = 0.0;    // int u^N before normalization
};

RadialSamples sample_density(const RadialProfile& u, const EuclideanRadialGrid& grid, double N) {
    RadialSamples s;
    s.u.resize(grid.r.size());
    for (Eigen::Index j = 0; j < grid.r.size(); ++j) s.u(j) = std::abs(u.f(grid.r(j)));
    s.uN = grid.weights.dot(s.u.array().pow(N).matrix());
    if (!(s.uN > 0.0)) throw DomainError("density profile vanishes on the grid");
    s.u *= std::pow(s.uN, -1.0 / N);
    return s;
}

Eigen::VectorXd sample(const RadialProfile& p, const EuclideanRadialGrid& grid) {
    Eigen::VectorXd v(grid.r.size());
    for (Eigen::Index j = 0; j < grid.r.size(); ++j) v(j) = p.f(grid.r(j));
    return v;
}

} // namespace

InequalityReport euclidean_refined_check(const EuclideanRadialGrid& grid, const RadialProfile& u,
                                           const RadialProfile& v) {
    const int n = grid.n;
    const double N = 2.0 * n / (n - 4.0);
    require_decay(u, grid, N);
    require_decay(v, grid, N);
    const auto us = sample_density(u, grid, N);
    const Eigen::VectorXd vv = sample(v, grid);
    const Eigen::VectorXd lap = radial_laplacian(v, grid);
    const double lhs = grid.weights.dot((us.u.array().pow(N - 2.0) * vv.array().square()).matrix());
    const double K2_sq = 1.0 / sharp_constant_inv_sq(n);
    const double rhs = std::pow(2.0, -4.0 / n) * K2_sq * grid.weights.dot(lap.array().square().matrix());
    std::ostringstream fp;
    fp << "R^" << n << " u=" << describe(u) << " v=" << describe(v) << " R=" << grid.R;
    return make_report("euclidean-refined", lhs, rhs, Relation::LessEqual, fp.str());
}

InequalityReport euclidean_two_plane_check(const EuclideanRadialGrid& grid, const RadialProfile& u,
                                           const RadialProfile& v1, const RadialProfile& v2) {
    const int n = grid.n;
    const double N = 2.0 * n / (n - 4.0);
    for (const auto* p : {&u, &v1, &v2}) require_decay(*p, grid, N);
    const auto us = sample_density(u, grid, N);
    const Eigen::VectorXd m = grid.weights.cwiseProduct(us.u.array().pow(N - 2.0).matrix());
    const Eigen::VectorXd a = sample(v1, grid), b = sample(v2, grid);
    const Eigen::VectorXd la = radial_laplacian(v1, grid), lb = radial_laplacian(v2, grid);
    Eigen::Matrix2d A, B;
    A << grid.weights.dot(la.cwiseProduct(la)), grid.weights.dot(la.cwiseProduct(lb)),
        grid.weights.dot(la.cwiseProduct(lb)), grid.weights.dot(lb.cwiseProduct(lb));
    B << m.dot(a.cwiseProduct(a)), m.dot(a.cwiseProduct(b)), m.dot(a.cwiseProduct(b)), m.dot(b.cwiseProduct(b));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(A, B);
    if (es.info() != Eigen::Success) throw DomainError("two-plane pencil is degenerate");
    const double lhs = es.eigenvalues()(1); // int u^N = 1 after normalization
    const double rhs = std::pow(2.0, 4.0 / n) * sharp_constant_inv_sq(n);
    std::ostringstream fp;
    fp << "R^" << n << " u=" << describe(u) << " span(" << describe(v1) << "," << describe(v2) << ")";
    return make_report("euclidean-two-plane", lhs, rhs, Relation::GreaterEqual, fp.str());
}

SobolevEpsAudit sobolev_eps_audit(double eps, double A_eps, const std::vector<ZonalField>& fields,
                         const OperatorCoefficients& coeffs, const ZonalBasis& basis, SharpConstantSource source) {
    if (eps < 0.0 || A_eps < 0.0) throw DomainError("eps and A(eps) must be nonnegative");
    if (fields.empty()) throw DomainError("Sobolev-eps audit needs at least one trial field");
    const int n = coeffs.n;
    const double K_inv_sq = source == SharpConstantSource::Oracle ? sharp_constant_inv_sq(n)
                                                                  : sharp_constant_report(EinsteinData::round_sphere(n)).gamma_ratio_formula;
    const double K2_sq = 1.0 / K_inv_sq;
    const auto& mu = basis.laplacian_eigenvalues();

    struct Terms {
        double lN, lap, l2;
    };
    std::vector<Terms> terms;
    for (const auto& f : fields) {
        require_size(basis, f.coeffs);
        const Eigen::VectorXd values = basis.synthesize(f.coeffs);
        Terms t;
        t.lN = lN_norm_sq(values, basis.rule(), coeffs.N);
        t.lap = f.coeffs.cwiseProduct(mu).squaredNorm();
        t.l2 = f.coeffs.squaredNorm();
        if (!(t.l2 > 0.0)) throw DomainError("trial field is zero");
        terms.push_back(t);
    }

    SobolevEpsAudit out;
    out.eps = eps;
    out.A_eps = A_eps;
    out.source = source;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        std::ostringstream fp;
        fp << "S^" << n << " field " << i << " degree " << fields[i].degree() << " eps=" << eps << " A=" << A_eps
           << (source == SharpConstantSource::Oracle ? " K2=oracle" : " K2=printed");
        out.reports.push_back(make_report("sobolev-eps", t.lN, (K2_sq + eps) * t.lap + A_eps * t.l2,
                                          Relation::LessEqual, fp.str()));
        out.sharpness.push_back(t.lap > 0.0 ? t.lN / (K2_sq * t.lap) : std::numeric_limits<double>::infinity());
    }

    auto clears = [&](double A) {
        for (const auto& t : terms) {
            const auto r = make_report("", t.lN, (K2_sq + eps) * t.lap + A * t.l2, Relation::LessEqual);
            if (r.verdict == Verdict::Violated) return false;
        }
        return true;
    };
    if (clears(0.0)) {
        out.minimal_A = 0.0;
        return out;
    }
    double lo = 0.0, hi = 1.0;
    while (!clears(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw DomainError("no finite A clears the trial family");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clears(mid) ? hi : lo) = mid;
    }
    out.minimal_A = hi;
    return out;
}

InequalityReport refined_inequality_ratio(const ConformalDensity& u, const ZonalField& v,
                                          const OperatorCoefficients& coeffs, const ZonalBasis& basis) {
    const auto& rule = basis.rule();
    const double uN = u.lN_mass(rule, coeffs.N);
    if (std::abs(uN - 1.0) > 1e-8) throw DomainError("density must be normalized (int u^N = 1)");
    require_size(basis, v.coeffs);
    const Eigen::VectorXd values = basis.synthesize(v.coeffs);
    const double lhs = rule.weights.dot((u.mass_weight(coeffs.N).array() * values.array().square()).matrix());
    const auto A = assemble_stiffness(coeffs, basis);
    const double energy = v.coeffs.dot(A.diag.cwiseProduct(v.coeffs));
    const double rhs = std::pow(2.0, -4.0 / coeffs.n) / coeffs.K2_inv_sq * energy * std::pow(uN, 2.0 / coeffs.N);
    std::ostringstream fp;
    fp << "S^" << coeffs.n << " v degree " << v.degree();
    return make_report("refined", lhs, rhs, Relation::LessEqual, fp.str());
}

InequalityReport refined_lambda2_form(const ConformalDensity& u, const OperatorCoefficients& coeffs,
                                      const ZonalBasis& basis, double eps) {
    if (eps < 0.0) throw DomainError("eps must be nonnegative");
    const auto spec = density_spectrum(coeffs, basis, u, 2);
    const double rhs = std::pow(2.0, 4.0 / coeffs.n) * coeffs.K2_inv_sq / (1.0 + eps);
    std::ostringstream fp;
    fp << "S^" << coeffs.n << " L=" << basis.degree() << " eps=" << eps;
    return make_report("refined-lambda2", spec.normalized[1], rhs, Relation::GreaterEqual, fp.str());
}

MuRelationReport mu_relation_audit(const EinsteinData& data, const OptimizerConfig& config, int random_fields,
                                   bool with_bubbles) {
    if (random_fields < 0) throw DomainError("random field count must be nonnegative");
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, config.q));
    InvariantObjective objective(coeffs, rule, config.L_opt, config.L_eig);
    OptimizerConfig cfg = config;
    cfg.k = 1;
    const auto best = minimize(objective, cfg);

    MuRelationReport out;
    out.n = data.n;
    out.mu1_hat = best.best_objective;

    const ZonalBasis& basis = objective.eigen_basis();
    std::vector<std::pair<std::string, ZonalField>> family;
    {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.dimension());
        c(0) = 1.0;
        family.emplace_back("constant", basis.from_coeffs(c));
    }
    for (double eps : {0.5, 1.0}) {
        if (!with_bubbles || required_degree(eps) > basis.degree()) continue;
        for (bool north : {true, false}) {
            BubbleSpec spec;
            spec.eps = eps;
            spec.delta = 0.5 * M_PI;
            spec.north = north;
            family.emplace_back("bubble eps=" + std::to_string(eps) + (north ? " N" : " S"),
                                bubble_field(spec, basis, coeffs).phi);
        }
    }
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < random_fields; ++i) {
        Eigen::VectorXd c(basis.dimension());
        for (Eigen::Index l = 0; l < c.size(); ++l) c(l) = gauss(rng) / (1.0 + l);
        family.emplace_back("random " + std::to_string(i), basis.from_coeffs(c));
    }
    out.mu_hat = std::numeric_limits<double>::infinity();
    for (const auto& [name, field] : family) {
        out.mu_hat = std::min(out.mu_hat, functional_Y(field, coeffs, basis));
        out.family.push_back(name);
    }
    out.product = out.mu1_hat / coeffs.K2_inv_sq;
    out.gap = std::abs(out.mu_hat - out.mu1_hat);
    out.hypothesis = make_report("", out.product, 1.0, Relation::LessEqual).verdict;
    std::ostringstream fp;
    fp << "S^" << data.n << " S=" << data.S << " L_opt=" << config.L_opt << " L_eig=" << config.L_eig;
    out.unconditional = make_report("mu1<=mu", out.mu1_hat, out.mu_hat * (1.0 + 1e-8), Relation::LessEqual, fp.str());
    return out;
}

} // namespace paneitz
