#include "paneitz/harness.hpp"

#include "paneitz/bubbles.hpp"
#include "paneitz/eigen_toolkit.hpp"
#include "paneitz/einstein_core.hpp"
#include "paneitz/optimizer.hpp"
#include "paneitz/sobolev_audit.hpp"
#include "paneitz/spectral.hpp"
#include "paneitz/zonal.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace paneitz {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kCommands{"coeffs", "spectrum", "minimize", "bubble-sweep", "two-plane-bound", "audit"};

bool bubble_command(const std::string& c) { return c == "bubble-sweep" || c == "two-plane-bound"; }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
    throw UsageError("field '" + key + "': " + why);
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) bad_field(key, "expected an integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out)) bad_field(key, "expected a finite number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_field(key, "expected true or false, got '" + v + "'");
}

int to_int(const std::string& key, long long x) {
    if (x < -1000000000LL || x > 1000000000LL) bad_field(key, "value out of range");
    return static_cast<int>(x);
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
    return s;
}

// --- CSV -------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string csv_field(const std::string& f) {
    if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

void write_csv(const fs::path& path, const Table& t) {
    std::string s;
    auto line = [&s](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + csv_field(cells[i]);
        s += "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    write_text(path, s);
}

std::string fd(double x) { return format_double(x); }
std::string fi(long long x) { return std::to_string(x); }

json vec_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json report_json(const InequalityReport& r) {
    return json{{"name", r.name},
                {"lhs", r.lhs},
                {"rhs", r.rhs},
                {"ratio", r.ratio},
                {"relation", r.relation == Relation::LessEqual ? "<=" : ">="},
                {"verdict", to_string(r.verdict)},
                {"fingerprint", r.fingerprint}};
}

// --- command payloads -----------------------------------------------------

struct CommandResult {
    json payload;
    std::vector<std::pair<std::string, Table>> tables;
    json timing = json::object();
    std::string summary;
};

EinsteinData make_data(const ExperimentConfig& cfg) {
    return cfg.S ? EinsteinData::with_curvature(cfg.n, *cfg.S) : EinsteinData::round_sphere(cfg.n);
}

CommandResult run_coeffs(const ExperimentConfig& cfg) {
    const auto data = make_data(cfg);
    const auto c = derive_coefficients(data);
    const auto disc = discriminant_identity(data);
    const auto sharp = sharp_constant_report(data);
    const double Q = q_curvature_einstein(data);

    CommandResult r;
    r.payload = json{{"n", c.n},
                     {"S", data.S},
                     {"alpha", c.alpha},
                     {"alpha_bar", c.alpha_bar},
                     {"a", c.a},
                     {"b", c.b},
                     {"N", c.N},
                     {"Q_curvature", Q},
                     {"curvature_flagged", c.curvature_flagged},
                     {"K2_inv_sq", c.K2_inv_sq},
                     {"discriminant", {{"lhs", disc.lhs}, {"rhs", disc.rhs}, {"relative_error", disc.relative_error}}},
                     {"sharp_constant",
                      {{"oracle", sharp.oracle},
                       {"gamma_ratio_formula", sharp.gamma_ratio_formula},
                       {"sphere_volume_formula", sharp.sphere_volume_formula},
                       {"corrected_formula", sharp.corrected_formula},
                       {"ratio_gamma_to_oracle", sharp.ratio_gamma_to_oracle},
                       {"ratio_volume_to_oracle", sharp.ratio_volume_to_oracle},
                       {"ratio_gamma_to_volume", sharp.ratio_gamma_to_volume},
                       {"ratio_corrected_to_oracle", sharp.ratio_corrected_to_oracle},
                       {"discrepancy", sharp.discrepancy()}}}};

    Table t{{"quantity", "value"}, {}};
    for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{
             {"alpha", c.alpha}, {"alpha_bar", c.alpha_bar}, {"a", c.a}, {"b", c.b}, {"N", c.N},
             {"Q_curvature", Q}, {"K2_inv_sq", c.K2_inv_sq},
             {"gamma_ratio_formula", sharp.gamma_ratio_formula},
             {"sphere_volume_formula", sharp.sphere_volume_formula},
             {"corrected_formula", sharp.corrected_formula}})
        t.add({k, fd(v)});
    r.tables.emplace_back("coeffs.csv", std::move(t));

    std::ostringstream s;
    s << "n = " << c.n << ", S = " << data.S << (c.curvature_flagged ? " (S <= 0: not coercive)" : "") << "\n"
      << "alpha = " << c.alpha << ", alpha_bar = " << c.alpha_bar << ", a = " << c.a << ", b = " << c.b << "\n"
      << "K2^-2 = " << c.K2_inv_sq << "\n"
      << sharp.summary();
    r.summary = s.str();
    return r;
}

ConformalDensity make_density(const ExperimentConfig& cfg, const OperatorCoefficients& coeffs,
                              const std::shared_ptr<const QuadratureRule>& rule) {
    if (cfg.density == "const") return ConformalDensity::constant(*rule, coeffs.N);
    const ZonalBasis qb(rule, cfg.L_opt);
    if (cfg.density == "two-bubble") {
        return ConformalDensity::from_root(qb, two_bubble_initializer(qb, coeffs, cfg.init_eps, cfg.init_split),
                                           coeffs.N);
    }
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd c(qb.dimension());
    for (Eigen::Index l = 0; l < c.size(); ++l) c(l) = g(rng) / (1.0 + l);
    c(0) += 2.0;
    return ConformalDensity::from_root(qb, c, coeffs.N);
}

CommandResult run_spectrum(const ExperimentConfig& cfg) {
    const auto data = make_data(cfg);
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, cfg.resolved_q()));
    const ZonalBasis basis(rule, cfg.resolved_L());
    const auto density = make_density(cfg, coeffs, rule);
    const auto ds = density_spectrum(coeffs, basis, density, cfg.k);

    std::vector<double> closed;
    if (cfg.density == "const") {
        const auto A = assemble_stiffness(coeffs, basis);
        std::vector<double> a(A.diag.data(), A.diag.data() + A.diag.size());
        std::sort(a.begin(), a.end());
        const double f = std::pow(rule->weights.sum(), 4.0 / coeffs.n);
        for (int i = 0; i < cfg.k; ++i) closed.push_back(a[i] * f);
    }

    CommandResult r;
    r.payload = json{{"n", coeffs.n},
                     {"S", data.S},
                     {"density", cfg.density},
                     {"lN_mass", ds.lN_mass},
                     {"shift", ds.spectrum.shift},
                     {"eigenvalues", vec_json(ds.spectrum.eigenvalues)},
                     {"normalized", vec_json(ds.normalized)},
                     {"residuals", vec_json(ds.spectrum.residuals)},
                     {"closed_form", vec_json(closed)},
                     {"K2_inv_sq", coeffs.K2_inv_sq}};
    Table t{{"index", "lambda", "lambda_bar", "residual", "closed_form"}, {}};
    std::ostringstream s;
    s << "density " << cfg.density << " on S^" << coeffs.n << " (q = " << cfg.resolved_q() << ", L = "
      << cfg.resolved_L() << ")\n";
    for (int i = 0; i < cfg.k; ++i) {
        t.add({fi(i + 1), fd(ds.spectrum.eigenvalues[i]), fd(ds.normalized[i]), fd(ds.spectrum.residuals[i]),
               closed.empty() ? "" : fd(closed[i])});
        s << "lambda_bar_" << i + 1 << " = " << format_double(ds.normalized[i]) << "\n";
    }
    r.tables.emplace_back("spectrum.csv", std::move(t));
    r.summary = s.str();
    return r;
}

OptimizerConfig optimizer_config(const ExperimentConfig& cfg) {
    OptimizerConfig oc;
    oc.k = cfg.k;
    oc.L_opt = cfg.L_opt;
    oc.L_eig = cfg.resolved_L();
    oc.q = cfg.resolved_q();
    oc.restarts = cfg.restarts;
    oc.max_iter = cfg.iterations;
    oc.seed = cfg.seed;
    oc.init_eps = cfg.init_eps;
    oc.init_split = cfg.init_split;
    oc.parallel = cfg.parallel;
    return oc;
}

CommandResult run_minimize(const ExperimentConfig& cfg) {
    const auto data = make_data(cfg);
    const auto coeffs = derive_coefficients(data);
    const auto oc = optimizer_config(cfg);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, oc.q));
    const InvariantObjective obj(coeffs, rule, oc.L_opt, oc.L_eig);
    const auto res = minimize(obj, oc);

    const auto& best = res.traces[res.best_run];
    json nodal = nullptr;
    json fixed_point = nullptr;
    if (cfg.k >= 2) {
        const auto ev = obj.evaluate(res.best_coeffs, cfg.k, false);
        const auto& w = ev.spectrum.eigenfields[cfg.k - 1];
        const auto& v = ev.spectrum.eigenfields[0];
        const auto np = nodal_profile(w, ev.density, v, *rule, coeffs.N);
        nodal = json{{"sign_changes", np.sign_changes},
                     {"zero_crossings", vec_json(np.zero_crossings)},
                     {"min_value", np.min_value},
                     {"max_value", np.max_value},
                     {"weighted_orthogonality", np.weighted_orthogonality}};
        const double initial = best.entries.empty() ? fixed_point_residual(w, ev.density, *rule, coeffs.N)
                                                    : best.entries.front().fixed_point_residual;
        fixed_point = json{{"initial", initial}, {"final", fixed_point_residual(w, ev.density, *rule, coeffs.N)}};
    }

    CommandResult r;
    json runs = json::array();
    Table rt{{"run", "seed", "initializer", "status", "iterations", "initial_objective", "final_objective"}, {}};
    Table tt{{"run", "iter", "objective", "grad_norm", "gap", "fixed_point_residual", "smoothed"}, {}};
    json wall = json::array();
    for (const auto& t : res.traces) {
        runs.push_back(json{{"run", t.run},
                            {"seed", t.seed},
                            {"initializer", t.initializer},
                            {"status", t.status},
                            {"annotations", t.annotations},
                            {"iterations", t.entries.empty() ? 0 : t.entries.back().iter},
                            {"initial_objective", t.initial_objective},
                            {"final_objective", t.final_objective}});
        rt.add({fi(t.run), std::to_string(t.seed), t.initializer, t.status,
                fi(t.entries.empty() ? 0 : t.entries.back().iter), fd(t.initial_objective), fd(t.final_objective)});
        for (const auto& e : t.entries)
            tt.add({fi(t.run), fi(e.iter), fd(e.objective), fd(e.grad_norm), fd(e.gap), fd(e.fixed_point_residual),
                    e.smoothed ? "1" : "0"});
        wall.push_back(json{{"run", t.run}, {"seconds", t.entries.empty() ? 0.0 : t.entries.back().wall_time}});
    }
    Table ct{{"l", "c_l"}, {}};
    for (Eigen::Index l = 0; l < res.best_coeffs.size(); ++l) ct.add({fi(l), fd(res.best_coeffs(l))});

    r.payload = json{{"n", res.n},
                     {"S", data.S},
                     {"k", res.k},
                     {"best_objective", res.best_objective},
                     {"best_normalized", vec_json(res.best_normalized)},
                     {"best_run", res.best_run},
                     {"K2_inv_sq", res.K2_inv_sq},
                     {"existence_ratio", res.existence_ratio},
                     {"second_invariant_target", res.second_invariant_target},
                     {"second_invariant_ratio", res.second_invariant_ratio},
                     {"best_coeffs", vec_json(res.best_coeffs)},
                     {"nodal", nodal},
                     {"fixed_point", fixed_point},
                     {"runs", runs}};
    r.timing["runs"] = wall;
    r.tables.emplace_back("runs.csv", std::move(rt));
    r.tables.emplace_back("trace.csv", std::move(tt));
    r.tables.emplace_back("best_coeffs.csv", std::move(ct));

    std::ostringstream s;
    s << "k = " << res.k << " on S^" << res.n << ": best lambda_bar_" << res.k << " = "
      << format_double(res.best_objective) << " (run " << res.best_run << ")\n"
      << "ratio to K2^-2 = " << res.best_objective / res.K2_inv_sq << "\n";
    if (res.k >= 2) s << "ratio to 2^{4/n} K2^-2 = " << res.second_invariant_ratio << "\n";
    r.summary = s.str();
    return r;
}

CommandResult run_sweep(const ExperimentConfig& cfg) {
    const auto data = make_data(cfg);
    const auto rep = epsilon_sweep(data, cfg.eps_grid, cfg.delta, cfg.resolved_q(), cfg.resolved_L());
    CommandResult r;
    json rows = json::array();
    Table t{{"eps", "Y", "Y_over_K", "c_norm", "alias_error", "below_sharp_constant"}, {}};
    for (const auto& row : rep.rows) {
        rows.push_back(json{{"eps", row.eps},
                            {"Y", row.Y},
                            {"Y_over_K", row.Y_over_K},
                            {"c_norm", row.c_norm},
                            {"alias_error", row.alias_error},
                            {"below_sharp_constant", row.below_sharp_constant}});
        t.add({fd(row.eps), fd(row.Y), fd(row.Y_over_K), fd(row.c_norm), fd(row.alias_error),
               row.below_sharp_constant ? "1" : "0"});
    }
    r.payload = json{{"n", rep.n},
                     {"S", data.S},
                     {"q", rep.q},
                     {"L", rep.L},
                     {"delta", rep.delta},
                     {"rows", rows},
                     {"A", rep.A},
                     {"C", rep.c_quadratic},
                     {"residual", rep.residual},
                     {"K2_inv_sq", rep.K2_inv_sq},
                     {"A_relative_error", rep.A_relative_error},
                     {"c_norm_exponent", rep.c_norm_exponent}};
    r.tables.emplace_back("sweep.csv", std::move(t));
    std::ostringstream s;
    s << "fit Y(eps) = A - C eps^2 on S^" << rep.n << ": A = " << format_double(rep.A)
      << " (K2^-2 = " << format_double(rep.K2_inv_sq) << ", rel. error " << rep.A_relative_error
      << "), C = " << format_double(rep.c_quadratic) << "\n";
    r.summary = s.str();
    return r;
}

CommandResult run_two_plane(const ExperimentConfig& cfg) {
    const auto data = make_data(cfg);
    const double mu1 = cfg.mu1 ? *cfg.mu1 : sharp_constant_inv_sq(cfg.n);
    const auto rep = two_plane_bound(data, mu1, cfg.eps_grid, cfg.delta, cfg.resolved_q(), cfg.resolved_L());
    CommandResult r;
    json rows = json::array();
    Table t{{"eps", "Y", "upper_bound", "lower_value"}, {}};
    for (const auto& row : rep.rows) {
        rows.push_back(json{{"eps", row.eps}, {"Y", row.Y}, {"upper_bound", row.upper_bound}, {"lower_value", row.lower_value}});
        t.add({fd(row.eps), fd(row.Y), fd(row.upper_bound), fd(row.lower_value)});
    }
    r.payload = json{{"n", rep.n},
                     {"S", data.S},
                     {"mu1", rep.mu1},
                     {"K2_inv_sq", rep.K2_inv_sq},
                     {"target", rep.target},
                     {"rows", rows},
                     {"best_eps", rep.best_eps},
                     {"best_bound", rep.best_bound},
                     {"ratio", rep.ratio},
                     {"outside_hypothesis", rep.outside_hypothesis}};
    r.tables.emplace_back("two_plane.csv", std::move(t));
    std::ostringstream s;
    s << "two-plane bound on S^" << rep.n << ": " << format_double(rep.best_bound) << " at eps = " << rep.best_eps
      << ", target " << format_double(rep.target) << ", ratio " << rep.ratio
      << (rep.outside_hypothesis ? " (n < 12: outside the hypothesis)" : "") << "\n";
    r.summary = s.str();
    return r;
}

CommandResult run_audit(const ExperimentConfig& cfg) {
    const auto data = make_data(cfg);
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, cfg.resolved_q()));
    const ZonalBasis basis(rule, cfg.resolved_L());
    std::vector<InequalityReport> reports;
    json sections = json::object();

    // Sobolev-eps inequality on constants and resolvable bubbles.
    std::vector<ZonalField> fields;
    {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.dimension());
        c(0) = 1.0;
        fields.push_back(basis.from_coeffs(c));
    }
    std::vector<double> bubble_eps;
    for (double e : cfg.eps_grid) {
        if (required_degree(e) > basis.degree()) continue;
        bubble_eps.push_back(e);
        fields.push_back(bubble_field(BubbleSpec{e, cfg.delta, true}, basis, coeffs).phi);
    }
    json eps_audits = json::array();
    for (auto src : {SharpConstantSource::Oracle, SharpConstantSource::PrintedGammaFormula}) {
        const auto a = sobolev_eps_audit(cfg.audit_eps, cfg.audit_A, fields, coeffs, basis, src);
        for (const auto& rep : a.reports) reports.push_back(rep);
        eps_audits.push_back(json{{"K2_source", src == SharpConstantSource::Oracle ? "oracle" : "printed"},
                            {"eps", a.eps},
                            {"A_eps", a.A_eps},
                            {"minimal_A", a.minimal_A},
                            {"sharpness", vec_json(a.sharpness)}});
    }
    sections["sobolev_eps"] = json{{"bubble_eps", vec_json(bubble_eps)}, {"audits", eps_audits}};

    // Refined inequality as printed, and its second-eigenvalue form.
    const auto cu = ConformalDensity::constant(*rule, coeffs.N);
    reports.push_back(refined_inequality_ratio(cu, fields.front(), coeffs, basis));
    reports.push_back(refined_lambda2_form(cu, coeffs, basis));
    {
        const ZonalBasis qb(rule, cfg.L_opt);
        for (double e : {0.2, 0.3, 0.5}) {
            for (double split : {0.3, 0.5, 0.7}) {
                const auto u = ConformalDensity::from_root(qb, two_bubble_initializer(qb, coeffs, e, split), coeffs.N);
                auto rep = refined_lambda2_form(u, coeffs, basis);
                std::ostringstream fp;
                fp << " two-bubble eps=" << e << " split=" << split;
                rep.fingerprint += fp.str();
                reports.push_back(rep);
            }
        }
    }

    // Flat space.
    const auto grid = build_radial_grid(cfg.n);
    const auto bub = euclidean_bubble(cfg.n);
    reports.push_back(euclidean_refined_check(grid, bub, bub));
    reports.push_back(euclidean_refined_check(grid, shell_bump(2.0, 4.0), core_bump(1.0)));
    {
        const auto v1 = euclidean_bubble(cfg.n, 0.2);
        const auto v2 = shell_bump(3.0, 6.0);
        const double N = coeffs.N;
        RadialProfile u;
        u.name = "pair(" + v1.name + "," + v2.name + ")";
        u.f = [v1, v2, N](double r) { return std::pow(std::pow(v1.f(r), N) + std::pow(v2.f(r), N), 1.0 / N); };
        u.d1 = u.d2 = [](double) { return 0.0; };
        reports.push_back(euclidean_two_plane_check(grid, u, v1, v2));
    }

    // mu versus mu_1.
    auto oc = optimizer_config(cfg);
    const auto mu = mu_relation_audit(data, oc);
    reports.push_back(mu.unconditional);
    sections["mu_relation"] = json{{"mu1_hat", mu.mu1_hat},
                                   {"mu_hat", mu.mu_hat},
                                   {"product", mu.product},
                                   {"gap", mu.gap},
                                   {"hypothesis", to_string(mu.hypothesis)},
                                   {"family", mu.family}};

    // Elementary inequality.
    json elem = json::array();
    Table et{{"p", "C", "samples", "violations", "worst_ratio"}, {}};
    std::vector<std::pair<double, double>> cases;
    for (double p : {2.5, 3.0, 4.0, 5.5}) cases.emplace_back(p, std::pow(2.0, p));
    cases.emplace_back(4.0, 0.1);
    for (const auto& [p, C] : cases) {
        const auto e = elementary_inequality_check(p, C, 100000, cfg.seed);
        elem.push_back(json{{"p", e.p}, {"C", e.C}, {"samples", e.samples}, {"violations", e.violations}, {"worst_ratio", e.worst_ratio}});
        et.add({fd(e.p), fd(e.C), fi(e.samples), fi(e.violations), fd(e.worst_ratio)});
    }
    sections["elementary"] = elem;

    json rj = json::array();
    Table t{{"name", "lhs", "rhs", "ratio", "relation", "verdict", "fingerprint"}, {}};
    std::ostringstream s;
    for (const auto& rep : reports) {
        rj.push_back(report_json(rep));
        t.add({rep.name, fd(rep.lhs), fd(rep.rhs), fd(rep.ratio), rep.relation == Relation::LessEqual ? "<=" : ">=",
               to_string(rep.verdict), rep.fingerprint});
        s << rep.name << ": ratio " << rep.ratio << " " << to_string(rep.verdict) << "  [" << rep.fingerprint << "]\n";
    }
    CommandResult r;
    r.payload = json{{"n", cfg.n}, {"S", data.S}, {"reports", rj}, {"sections", sections}};
    r.tables.emplace_back("reports.csv", std::move(t));
    r.tables.emplace_back("elementary.csv", std::move(et));
    r.summary = s.str();
    return r;
}

json config_json(const ExperimentConfig& cfg) {
    json j = json::object();
    std::istringstream in(canonical_config(cfg));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        j[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j;
}

} // namespace

// --- configuration --------------------------------------------------------

double ExperimentConfig::curvature() const { return S ? *S : static_cast<double>(n) * (n - 1); }

int ExperimentConfig::resolved_L() const { return L ? *L : (bubble_command(command) ? 320 : 48); }

int ExperimentConfig::resolved_q() const { return q ? *q : (bubble_command(command) ? 400 : 200); }

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "n",        "S",          "round",      "L",         "q",        "k",         "L_opt",
        "restarts", "iterations", "seed",       "eps_grid",  "delta",    "density",   "init_eps",
        "init_split", "mu1",      "audit_eps",  "audit_A",   "parallel"};
    return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string v = trim(raw_value);
    if (key == "n") cfg.n = to_int(key, parse_int(key, v));
    else if (key == "S") cfg.S = parse_double(key, v);
    else if (key == "round") cfg.round = parse_bool(key, v);
    else if (key == "L") cfg.L = to_int(key, parse_int(key, v));
    else if (key == "q") cfg.q = to_int(key, parse_int(key, v));
    else if (key == "k") cfg.k = to_int(key, parse_int(key, v));
    else if (key == "L_opt") cfg.L_opt = to_int(key, parse_int(key, v));
    else if (key == "restarts") cfg.restarts = to_int(key, parse_int(key, v));
    else if (key == "iterations") cfg.iterations = to_int(key, parse_int(key, v));
    else if (key == "seed") {
        const long long s = parse_int(key, v);
        if (s < 0) bad_field(key, "must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "eps_grid") {
        std::vector<double> g;
        std::istringstream in(v);
        std::string item;
        while (std::getline(in, item, ',')) g.push_back(parse_double(key, trim(item)));
        cfg.eps_grid = std::move(g);
    } else if (key == "delta") cfg.delta = parse_double(key, v);
    else if (key == "density") cfg.density = v;
    else if (key == "init_eps") cfg.init_eps = parse_double(key, v);
    else if (key == "init_split") cfg.init_split = parse_double(key, v);
    else if (key == "mu1") cfg.mu1 = parse_double(key, v);
    else if (key == "audit_eps") cfg.audit_eps = parse_double(key, v);
    else if (key == "audit_A") cfg.audit_A = parse_double(key, v);
    else if (key == "parallel") cfg.parallel = parse_bool(key, v);
    else throw UsageError("unknown configuration key '" + raw_key + "'");
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

void validate(const ExperimentConfig& cfg) {
    if (!kCommands.count(cfg.command)) throw UsageError("unknown command '" + cfg.command + "'");
    if (cfg.n < 5 || cfg.n > 64) bad_field("n", "must lie in [5, 64], got " + std::to_string(cfg.n));
    if (cfg.round && cfg.S) bad_field("S", "conflicts with round; give one of them");
    const std::string& c = cfg.command;
    if (c == "coeffs") return;

    const double S = cfg.curvature();
    if (!(S > 0.0)) bad_field("S", "must be positive for '" + c + "' (the operator is not coercive for S <= 0)");
    const int q = cfg.resolved_q(), L = cfg.resolved_L();
    if (q < 8 || q > 20000) bad_field("q", "must lie in [8, 20000], got " + std::to_string(q));
    if (L < 1 || L >= q) bad_field("L", "must satisfy 1 <= L < q, got L = " + std::to_string(L) + ", q = " + std::to_string(q));
    if (cfg.L_opt < 0 || cfg.L_opt >= q) bad_field("L_opt", "must satisfy 0 <= L_opt < q");

    if (c == "spectrum") {
        if (cfg.k < 1 || cfg.k > L + 1) bad_field("k", "must lie in [1, L + 1]");
        if (cfg.density != "const" && cfg.density != "two-bubble" && cfg.density != "random")
            bad_field("density", "must be const, two-bubble or random, got '" + cfg.density + "'");
    }
    if (c == "minimize" || c == "audit") {
        if (c == "minimize" && (cfg.k < 1 || cfg.k > L - 1)) bad_field("k", "must lie in [1, L - 1]");
        if (cfg.restarts < 0) bad_field("restarts", "must be nonnegative");
        if (cfg.iterations < 0) bad_field("iterations", "must be nonnegative");
    }
    if (c == "spectrum" || c == "minimize" || c == "audit") {
        if (!(cfg.init_eps > 0.0)) bad_field("init_eps", "must be positive");
        if (!(cfg.init_split >= 0.0 && cfg.init_split <= 1.0)) bad_field("init_split", "must lie in [0, 1]");
    }
    if (bubble_command(c) || c == "audit") {
        if (!(cfg.delta > 0.0 && cfg.delta <= 0.5 * std::numbers::pi)) bad_field("delta", "must lie in (0, pi/2]");
        for (double e : cfg.eps_grid)
            if (!(e > 0.0)) bad_field("eps_grid", "entries must be positive");
    }
    if (bubble_command(c)) {
        if (c == "bubble-sweep" && cfg.n <= 6) bad_field("n", "bubble-sweep needs n > 6");
        if (c == "bubble-sweep" && cfg.eps_grid.size() < 3) bad_field("eps_grid", "needs at least 3 points");
        if (cfg.eps_grid.empty()) bad_field("eps_grid", "needs at least one point");
        const double emin = *std::min_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
        if (required_degree(emin) > L)
            bad_field("L", "eps = " + format_double(emin) + " needs L >= " + std::to_string(required_degree(emin)));
        if (cfg.mu1 && !(*cfg.mu1 > 0.0)) bad_field("mu1", "must be positive");
    }
    if (c == "audit") {
        if (cfg.audit_eps < 0.0) bad_field("audit_eps", "must be nonnegative");
        if (cfg.audit_A < 0.0) bad_field("audit_A", "must be nonnegative");
    }
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> kv{
        {"command", cfg.command},
        {"n", std::to_string(cfg.n)},
        {"S", format_double(cfg.curvature())},
        {"L", std::to_string(cfg.resolved_L())},
        {"q", std::to_string(cfg.resolved_q())},
        {"k", std::to_string(cfg.k)},
        {"L_opt", std::to_string(cfg.L_opt)},
        {"restarts", std::to_string(cfg.restarts)},
        {"iterations", std::to_string(cfg.iterations)},
        {"seed", std::to_string(cfg.seed)},
        {"eps_grid", join_doubles(cfg.eps_grid)},
        {"delta", format_double(cfg.delta)},
        {"density", cfg.density},
        {"init_eps", format_double(cfg.init_eps)},
        {"init_split", format_double(cfg.init_split)},
        {"mu1", cfg.mu1 ? format_double(*cfg.mu1) : "default"},
        {"audit_eps", format_double(cfg.audit_eps)},
        {"audit_A", format_double(cfg.audit_A)},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : canonical_config(cfg)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

fs::path output_root(const std::optional<std::string>& cli_out) {
    if (cli_out && !cli_out->empty()) return *cli_out;
    if (const char* env = std::getenv("PANEITZ_LAB_OUT"); env && *env) return env;
    return "runs";
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// --- dispatch -------------------------------------------------------------

RunOutcome dispatch(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    CommandResult res;
    try {
        if (cfg.command == "coeffs") res = run_coeffs(cfg);
        else if (cfg.command == "spectrum") res = run_spectrum(cfg);
        else if (cfg.command == "minimize") res = run_minimize(cfg);
        else if (cfg.command == "bubble-sweep") res = run_sweep(cfg);
        else if (cfg.command == "two-plane-bound") res = run_two_plane(cfg);
        else res = run_audit(cfg);
    } catch (const DomainError& e) {
        throw DomainError(cfg.command + " (n = " + std::to_string(cfg.n) + "): " + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunOutcome out;
    out.hash = config_hash(cfg);
    out.directory = fs::path(cfg.out_root.empty() ? output_root(std::nullopt) : fs::path(cfg.out_root)) / out.hash;
    fs::create_directories(out.directory);

    const json record{{"schema", kRecordSchema},
                      {"artifact_version", kArtifactVersion},
                      {"command", cfg.command},
                      {"config", config_json(cfg)},
                      {"config_hash", out.hash},
                      {"seed", cfg.seed},
                      {"payload", res.payload}};
    write_text(out.directory / "record.json", record.dump(2) + "\n");
    for (const auto& [name, table] : res.tables) write_csv(out.directory / name, table);
    json timing = res.timing;
    timing["total_seconds"] = seconds;
    timing["finished_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    write_text(out.directory / "timing.json", timing.dump(2) + "\n");

    out.summary = res.summary + "record: " + (out.directory / "record.json").string() + "\n";
    return out;
}

// --- report ---------------------------------------------------------------

namespace {

struct Group {
    std::optional<double> K2_inv_sq, mu1_hat, mu2_hat, two_plane_bound, second_invariant_target;
    std::optional<int> sign_changes;
    std::optional<double> orthogonality, fp_initial, fp_final;
    int runs = 0;
};

void keep_min(std::optional<double>& slot, double v) {
    if (!slot || v < *slot) slot = v;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

ReportOutcome report(const fs::path& root) {
    ReportOutcome out;
    std::map<int, Group> groups;
    Table runs{{"config_hash", "command", "n", "S", "k", "seed", "headline"}, {}};
    json run_list = json::array();

    std::vector<fs::path> dirs;
    if (fs::is_directory(root)) {
        for (const auto& entry : fs::directory_iterator(root))
            if (entry.is_directory() && fs::exists(entry.path() / "record.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());

    for (const auto& dir : dirs) {
        const auto path = dir / "record.json";
        json rec;
        try {
            std::ifstream in(path);
            rec = json::parse(in);
            if (!rec.is_object() || rec.value("schema", 0) != kRecordSchema) throw std::runtime_error("unsupported schema");
            for (const char* key : {"command", "config_hash", "payload"})
                if (!rec.contains(key)) throw std::runtime_error(std::string("missing field '") + key + "'");
            const auto& p = rec.at("payload");
            const std::string cmd = rec.at("command").get<std::string>();
            const int n = p.at("n").get<int>();
            auto& g = groups[n];
            ++g.runs;
            double headline = std::nan("");
            int k = 0;
            if (cmd == "minimize") {
                k = p.at("k").get<int>();
                headline = p.at("best_objective").get<double>();
                g.K2_inv_sq = p.at("K2_inv_sq").get<double>();
                if (k == 1) keep_min(g.mu1_hat, headline);
                if (k == 2) {
                    const bool better = !g.mu2_hat || headline < *g.mu2_hat;
                    keep_min(g.mu2_hat, headline);
                    if (better && p.at("nodal").is_object()) {
                        g.sign_changes = p.at("nodal").at("sign_changes").get<int>();
                        g.orthogonality = p.at("nodal").at("weighted_orthogonality").get<double>();
                        g.fp_initial = p.at("fixed_point").at("initial").get<double>();
                        g.fp_final = p.at("fixed_point").at("final").get<double>();
                    }
                }
            } else if (cmd == "two-plane-bound") {
                headline = p.at("best_bound").get<double>();
                keep_min(g.two_plane_bound, headline);
                g.second_invariant_target = p.at("target").get<double>();
                g.K2_inv_sq = p.at("K2_inv_sq").get<double>();
            } else if (cmd == "bubble-sweep") {
                headline = p.at("A").get<double>();
            } else if (cmd == "coeffs") {
                headline = p.at("K2_inv_sq").get<double>();
            } else if (cmd == "spectrum") {
                headline = p.at("normalized").at(0).get<double>();
            }
            const double S = p.value("S", std::nan(""));
            runs.add({rec.at("config_hash").get<std::string>(), cmd, fi(n), fd(S), k ? fi(k) : "",
                      std::to_string(rec.value("seed", std::uint64_t{0})), fd(headline)});
            run_list.push_back(json{{"config_hash", rec.at("config_hash")}, {"command", cmd}, {"n", n}, {"headline", headline}});
            ++out.valid;
        } catch (const std::exception& e) {
            ++out.skipped;
            out.warnings.push_back("warning: skipping " + path.string() + ": " + e.what());
        }
    }

    if (out.valid == 0) {
        out.summary = "no runs: " + root.string() + " holds no readable record.json\n";
        return out;
    }

    Table summary{{"n", "runs", "K2_inv_sq", "mu1_hat", "mu2_hat", "two_plane_bound", "second_invariant_target",
                   "mu2_at_or_below_bound", "existence_ratio", "existence_hypothesis", "sign_changes", "weighted_orthogonality",
                   "fixed_point_initial", "fixed_point_final"},
                  {}};
    json groups_json = json::array();
    std::ostringstream s;
    for (const auto& [n, g] : groups) {
        const double K = g.K2_inv_sq ? *g.K2_inv_sq : sharp_constant_inv_sq(n);
        std::optional<double> existence;
        if (g.mu2_hat) existence = *g.mu2_hat / K * std::pow(2.0, -4.0 / n);
        std::string cmp = "";
        if (g.mu2_hat && g.two_plane_bound) cmp = *g.mu2_hat <= *g.two_plane_bound ? "yes" : "no";
        const std::string existence_flag = existence ? (*existence < 1.0 ? "yes" : "no") : "";
        summary.add({fi(n), fi(g.runs), fd(K), opt(g.mu1_hat), opt(g.mu2_hat), opt(g.two_plane_bound),
                     opt(g.second_invariant_target), cmp, opt(existence), existence_flag, g.sign_changes ? fi(*g.sign_changes) : "",
                     opt(g.orthogonality), opt(g.fp_initial), opt(g.fp_final)});
        groups_json.push_back(json{{"n", n},
                                   {"runs", g.runs},
                                   {"K2_inv_sq", K},
                                   {"mu1_hat", opt_json(g.mu1_hat)},
                                   {"mu2_hat", opt_json(g.mu2_hat)},
                                   {"two_plane_bound", opt_json(g.two_plane_bound)},
                                   {"second_invariant_target", opt_json(g.second_invariant_target)},
                                   {"mu2_at_or_below_bound", cmp},
                                   {"existence_ratio", opt_json(existence)},
                                   {"existence_hypothesis", existence_flag},
                                   {"sign_changes", g.sign_changes ? json(*g.sign_changes) : json(nullptr)},
                                   {"weighted_orthogonality", opt_json(g.orthogonality)},
                                   {"fixed_point_initial", opt_json(g.fp_initial)},
                                   {"fixed_point_final", opt_json(g.fp_final)}});
        s << "n = " << n << ": " << g.runs << " run(s)";
        if (g.mu1_hat) s << ", mu1_hat = " << format_double(*g.mu1_hat);
        if (g.mu2_hat) s << ", mu2_hat = " << format_double(*g.mu2_hat);
        if (g.two_plane_bound) s << ", bound = " << format_double(*g.two_plane_bound);
        if (existence) s << ", mu2 K2^2 2^{-4/n} = " << *existence;
        s << "\n";
    }
    write_csv(root / "summary.csv", summary);
    write_csv(root / "runs.csv", runs);
    const json combined{{"schema", kRecordSchema},
                        {"artifact_version", kArtifactVersion},
                        {"valid", out.valid},
                        {"skipped", out.skipped},
                        {"warnings", out.warnings},
                        {"groups", groups_json},
                        {"runs", run_list}};
    write_text(root / "summary.json", combined.dump(2) + "\n");
    out.summary = s.str();
    return out;
}

} // namespace paneitz
