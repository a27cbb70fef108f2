#include "paneitz/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <random>

namespace paneitz {

namespace {

Eigen::VectorXd signed_pow(const Eigen::VectorXd& q, double p) {
    return (q.array().sign() * q.array().abs().pow(p)).matrix();
}

double root_mass(const ZonalBasis& basis, const Eigen::VectorXd& c, double N) {
    return basis.rule().weights.dot(basis.synthesize(c).array().abs().pow(2.0 * N).matrix());
}

Eigen::VectorXd project_out(const Eigen::VectorXd& g, const Eigen::VectorXd& c) {
    return g - (g.dot(c) / c.squaredNorm()) * c;
}

} // namespace

InvariantObjective::InvariantObjective(const OperatorCoefficients& coeffs, std::shared_ptr<const QuadratureRule> rule,
                                       int L_opt, int L_eig)
    : coeffs_(coeffs), qbasis_(rule, L_opt), ebasis_(rule, L_eig), stiffness_(assemble_stiffness(coeffs, ebasis_)) {
    if (L_opt < 0 || L_eig < 1) throw DomainError("optimizer degrees must satisfy L_opt >= 0, L_eig >= 1");
}

Eigen::VectorXd InvariantObjective::normalize(const Eigen::VectorXd& c) const {
    const double mass = root_mass(qbasis_, c, coeffs_.N);
    if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("degenerate density root (q vanishes at every node)");
    return c * std::pow(mass, -1.0 / (2.0 * coeffs_.N));
}

Eigen::VectorXd InvariantObjective::eigen_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& v, double lambda,
                                                   double mass) const {
    const double N = coeffs_.N;
    const double n = coeffs_.n;
    const double vol_factor = std::pow(mass, 4.0 / n);
    const Eigen::ArrayXd dlambda = -2.0 * lambda * (N - 2.0) * signed_pow(q, 2.0 * N - 5.0).array() * v.array().square();
    const Eigen::ArrayXd dmass = 2.0 * N * signed_pow(q, 2.0 * N - 1.0).array();
    const Eigen::VectorXd pointwise =
        (vol_factor * dlambda + lambda * (4.0 / n) * std::pow(mass, 4.0 / n - 1.0) * dmass).matrix();
    return qbasis_.node_table() * pointwise.cwiseProduct(qbasis_.rule().weights);
}

InvariantObjective::Evaluation InvariantObjective::evaluate(const Eigen::VectorXd& c, int k, bool with_gradient,
                                                            double tau, double gap_tol) const {
    if (k < 1 || k >= ebasis_.dimension()) throw DomainError("eigenvalue index k out of range");
    if (c.size() != qbasis_.dimension()) throw DomainError("coefficient length does not match L_opt");
    if (!(c.cwiseAbs().maxCoeff() > 0.0)) throw DomainError("degenerate density root (all-zero q)");

    const double N = coeffs_.N;
    const Eigen::VectorXd q = qbasis_.synthesize(c);
    const double mass = qbasis_.rule().weights.dot(q.array().abs().pow(2.0 * N).matrix());
    if (!(mass > 0.0)) throw DomainError("degenerate density root (q vanishes at every node)");

    ConformalDensity raw;
    raw.u = q.cwiseAbs2();
    const auto B = assemble_mass(raw, ebasis_, N);
    Evaluation ev;
    ev.spectrum = solve_generalized_eigen(stiffness_, B, k + 1, ebasis_);
    ev.lN_mass = 1.0;
    const double factor = std::pow(mass, 4.0 / coeffs_.n);
    for (double l : ev.spectrum.eigenvalues) ev.normalized.push_back(l * factor);
    ev.density.u = raw.u * std::pow(mass, -1.0 / N);
    ev.density.root_coeffs = c * std::pow(mass, -1.0 / (2.0 * N));
    ev.density.normalized = true;

    const auto& lb = ev.normalized;
    const double lk = lb[k - 1];
    ev.exact = lk;
    ev.value = lk;
    const bool lower = k >= 2 && (lk - lb[k - 2]) < gap_tol * lk;
    const bool upper = (lb[k] - lk) < gap_tol * lk;
    ev.gap_isolated = !(lower || upper);

    // members of the smoothed set, and the sign: +1 softmax, -1 softmin
    std::vector<int> members{k - 1};
    double sign = 1.0;
    if (!ev.gap_isolated && tau > 0.0) {
        ev.smoothed = true;
        if (lower) {
            members = {k - 2, k - 1};
        } else {
            members = {k - 1, k};
            sign = -1.0;
        }
        const double T = tau * lk;
        double ref = sign * lb[members[0]];
        for (int i : members) ref = std::max(ref, sign * lb[i]);
        double z = 0.0;
        for (int i : members) z += std::exp((sign * lb[i] - ref) / T);
        ev.value = sign * (ref + T * std::log(z));
    }

    if (with_gradient) {
        ev.gradient = Eigen::VectorXd::Zero(c.size());
        if (ev.smoothed) {
            const double T = tau * lk;
            double ref = sign * lb[members[0]];
            for (int i : members) ref = std::max(ref, sign * lb[i]);
            double z = 0.0;
            for (int i : members) z += std::exp((sign * lb[i] - ref) / T);
            for (int i : members) {
                const double p = std::exp((sign * lb[i] - ref) / T) / z;
                ev.gradient += p * eigen_gradient(q, ev.spectrum.eigenfields[i].values, ev.spectrum.eigenvalues[i], mass);
            }
        } else {
            ev.gradient =
                eigen_gradient(q, ev.spectrum.eigenfields[k - 1].values, ev.spectrum.eigenvalues[k - 1], mass);
        }
    }
    return ev;
}

double InvariantObjective::value(const Eigen::VectorXd& c, int k) const { return evaluate(c, k, false).exact; }

Eigen::VectorXd two_bubble_initializer(const ZonalBasis& basis, const OperatorCoefficients& coeffs, double eps,
                                       double split) {
    if (!(eps > 0.0)) throw DomainError("bubble scale eps must be positive");
    if (!(split >= 0.0 && split <= 1.0)) throw DomainError("mass split must lie in [0, 1]");
    const auto& rule = basis.rule();
    const double N = coeffs.N;
    const double p = -0.5 * (coeffs.n - 4);
    const Eigen::ArrayXd x = rule.nodes.array();
    const Eigen::ArrayXd bn = (2.0 * (1.0 - x) + eps * eps).pow(p);
    const Eigen::ArrayXd bs = (2.0 * (1.0 + x) + eps * eps).pow(p);
    const auto lnorm = [&](const Eigen::ArrayXd& f) {
        return std::pow(rule.weights.dot(f.pow(N).matrix()), 1.0 / N);
    };
    const Eigen::ArrayXd u =
        std::pow(split, 1.0 / N) * bn / lnorm(bn) + std::pow(1.0 - split, 1.0 / N) * bs / lnorm(bs);
    Eigen::VectorXd c = basis.analyze(u.sqrt().matrix());
    const double mass = root_mass(basis, c, N);
    return c * std::pow(mass, -1.0 / (2.0 * N));
}

RunTrace descend(const InvariantObjective& objective, const OptimizerConfig& config, Eigen::VectorXd c0) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const auto seconds = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
    const int k = config.k;
    const auto& rule = objective.eigen_basis().rule();
    const double N = objective.coefficients().N;

    RunTrace trace;
    Eigen::VectorXd c = objective.normalize(c0);
    trace.initial_coeffs = c;
    double tau = config.tau0;
    auto ev = objective.evaluate(c, k, true, tau, config.gap_tol);

    const auto record = [&](int iter, const InvariantObjective::Evaluation& e, double gnorm) {
        TraceEntry t;
        t.iter = iter;
        t.objective = e.exact;
        t.grad_norm = gnorm;
        t.gap = e.normalized[1] - e.normalized[0];
        t.fixed_point_residual = fixed_point_residual(e.spectrum.eigenfields[k - 1], e.density, rule, N);
        t.wall_time = seconds();
        t.smoothed = e.smoothed;
        trace.entries.push_back(t);
    };

    Eigen::VectorXd g = project_out(ev.gradient, c);
    record(0, ev, g.norm());
    trace.initial_objective = ev.exact;
    trace.status = config.max_iter > 0 ? "max-iter" : "no-iterations";

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
    for (int it = 1; it <= config.max_iter; ++it) {
        if (g.norm() * c.norm() <= config.grad_tol * std::abs(ev.value)) {
            trace.status = "converged";
            break;
        }
        // L-BFGS two-loop recursion
        Eigen::VectorXd d = -g;
        if (!memory.empty()) {
            std::vector<double> alpha(memory.size());
            for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
                const auto& [s, y] = memory[i];
                alpha[i] = s.dot(d) / y.dot(s);
                d -= alpha[i] * y;
            }
            const auto& [s_last, y_last] = memory.back();
            d *= s_last.dot(y_last) / y_last.squaredNorm();
            for (std::size_t i = 0; i < memory.size(); ++i) {
                const auto& [s, y] = memory[i];
                const double beta = y.dot(d) / y.dot(s);
                d += (alpha[i] - beta) * s;
            }
            d = project_out(d, c);
            if (!(d.dot(g) < 0.0)) {
                memory.clear();
                d = -g;
            }
        }
        if (memory.empty()) d *= 1e-2 * c.norm() / g.norm();

        bool accepted = false;
        InvariantObjective::Evaluation next;
        Eigen::VectorXd c_next;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            const double slope = g.dot(d);
            double step = 1.0;
            for (int h = 0; h < 60; ++h, step *= config.backtrack) {
                c_next = c + step * d;
                try {
                    c_next = objective.normalize(c_next);
                    next = objective.evaluate(c_next, k, true, tau, config.gap_tol);
                } catch (const DomainError& e) {
                    trace.annotations.push_back("iter " + std::to_string(it) + ": step rejected (" + e.what() + ")");
                    continue;
                }
                if (!std::isfinite(next.value) || !std::isfinite(next.exact)) {
                    trace.annotations.push_back("iter " + std::to_string(it) + ": non-finite objective, step rejected");
                    continue;
                }
                if (next.value <= ev.value + config.armijo_c * step * slope && next.exact <= ev.exact) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted && !memory.empty()) {
                memory.clear();
                d = -g * (1e-2 * c.norm() / g.norm());
            } else {
                break;
            }
        }
        if (!accepted) {
            trace.status = "stalled";
            break;
        }

        const Eigen::VectorXd g_next = project_out(next.gradient, c_next);
        const Eigen::VectorXd s = c_next - c;
        const Eigen::VectorXd y = g_next - g;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            memory.emplace_back(s, y);
            if (static_cast<int>(memory.size()) > config.memory) memory.pop_front();
        }
        c = c_next;
        g = g_next;
        ev = std::move(next);
        if (ev.smoothed) tau *= config.tau_decay;
        record(it, ev, g.norm());
    }
    trace.final_coeffs = c;
    trace.final_objective = ev.exact;
    return trace;
}

MinimizeResult minimize(const InvariantObjective& objective, const OptimizerConfig& config) {
    if (config.k < 1) throw DomainError("k must be at least 1");
    if (config.restarts < 0 || config.max_iter < 0) throw DomainError("restarts and max_iter must be nonnegative");
    const auto& coeffs = objective.coefficients();
    const auto& qb = objective.density_basis();

    std::vector<Eigen::VectorXd> starts;
    std::vector<std::string> kinds;
    starts.push_back(two_bubble_initializer(qb, coeffs, config.init_eps, config.init_split));
    kinds.emplace_back("two-bubble");
    for (int r = 1; r <= config.restarts; ++r) {
        std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(r));
        std::normal_distribution<double> gauss;
        Eigen::VectorXd c(qb.dimension());
        for (int l = 0; l < c.size(); ++l) c(l) = gauss(rng) / (1.0 + l);
        c(0) += 2.0;
        starts.push_back(std::move(c));
        kinds.emplace_back("random");
    }

    std::vector<RunTrace> traces(starts.size());
    if (config.parallel && starts.size() > 1) {
        std::vector<std::future<RunTrace>> jobs;
        for (const auto& s : starts) {
            jobs.push_back(std::async(std::launch::async, [&objective, &config, s] { return descend(objective, config, s); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) traces[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < starts.size(); ++i) traces[i] = descend(objective, config, starts[i]);
    }

    MinimizeResult out;
    out.n = coeffs.n;
    out.k = config.k;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        traces[i].run = static_cast<int>(i);
        traces[i].seed = config.seed + i;
        traces[i].initializer = kinds[i];
        if (i == 0 || traces[i].final_objective < traces[out.best_run].final_objective) out.best_run = static_cast<int>(i);
    }
    out.traces = std::move(traces);
    const auto& best = out.traces[out.best_run];
    out.best_coeffs = best.final_coeffs;
    out.best_objective = best.final_objective;
    out.best_normalized = objective.evaluate(best.final_coeffs, config.k, false).normalized;
    out.K2_inv_sq = coeffs.K2_inv_sq;
    const double two = std::pow(2.0, 4.0 / coeffs.n);
    out.existence_ratio = out.best_objective / (coeffs.K2_inv_sq * two);
    out.second_invariant_target = two * coeffs.K2_inv_sq;
    out.second_invariant_ratio = out.best_objective / out.second_invariant_target;
    return out;
}

} // namespace paneitz
