#include "paneitz/einstein_core.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace paneitz {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients for g = 7, n = 9.
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

void require_dimension(int n) {
    if (n < 5) {
        throw DomainError("dimension n = " + std::to_string(n) +
                          " is below 5; N = 2n/(n-4) is undefined or nonpositive");
    }
}

} // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
    if (x < 0.5) {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double sum = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) sum += kLanczos[i] / (z + static_cast<double>(i));
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double gamma_fn(double x) {
    if (x < 0.5) {
        const double s = std::sin(kPi * x);
        if (s == 0.0) throw DomainError("gamma_fn pole at nonpositive integer");
        return kPi / (s * gamma_fn(1.0 - x));
    }
    return std::exp(log_gamma(x));
}

double unit_sphere_volume(int dim) {
    if (dim < 0) throw DomainError("sphere dimension must be nonnegative");
    const double h = 0.5 * (dim + 1);
    return 2.0 * std::exp(h * std::log(kPi) - log_gamma(h));
}

EinsteinData EinsteinData::round_sphere(int n) {
    require_dimension(n);
    EinsteinData d;
    d.n = n;
    d.S = static_cast<double>(n) * (n - 1);
    d.vol = unit_sphere_volume(n);
    d.round = true;
    return d;
}

EinsteinData EinsteinData::with_curvature(int n, double S) {
    require_dimension(n);
    if (!std::isfinite(S)) throw DomainError("scalar curvature must be finite");
    EinsteinData d;
    d.n = n;
    d.S = S;
    d.vol = unit_sphere_volume(n);
    d.round = (S == static_cast<double>(n) * (n - 1));
    return d;
}

OperatorCoefficients derive_coefficients(const EinsteinData& data) {
    require_dimension(data.n);
    const double n = data.n;
    const double S = data.S;
    OperatorCoefficients c;
    c.n = data.n;
    c.alpha = (n * n - 2.0 * n - 4.0) / (2.0 * n * (n - 1.0)) * S;
    c.alpha_bar = (n - 4.0) * (n * n - 4.0) / (16.0 * n * (n - 1.0) * (n - 1.0)) * S * S;
    // The discriminant alpha^2 - 4 alpha_bar equals (2S/(n(n-1)))^2 exactly;
    // using the closed form avoids cancellation.
    const double half_gap = std::abs(S) / (n * (n - 1.0));
    c.a = 0.5 * c.alpha - half_gap;
    c.b = 0.5 * c.alpha + half_gap;
    c.N = 2.0 * n / (n - 4.0);
    c.K2_inv_sq = sharp_constant_inv_sq(data.n);
    c.curvature_flagged = !(S > 0.0);
    return c;
}

double q_curvature_einstein(const EinsteinData& data) {
    require_dimension(data.n);
    const double n = data.n;
    const double S2 = data.S * data.S;
    const double ric_sq = S2 / n;
    const double c1 = (n * n * n - 4.0 * n * n + 16.0 * (n - 1.0)) /
                      (8.0 * (n - 1.0) * (n - 1.0) * (n - 2.0) * (n - 2.0));
    return c1 * S2 - 2.0 / ((n - 2.0) * (n - 2.0)) * ric_sq;
}

DiscriminantCheck discriminant_identity(const EinsteinData& data) {
    require_dimension(data.n);
    // alpha^2/4 and alpha_bar agree to about n^4/16 times the result, so
    // rounding alpha and alpha_bar to double alone costs ~1e-12 at n = 20;
    // the identity is therefore evaluated in extended precision.
    using ld = long double;
    const ld n = data.n;
    const ld S = data.S;
    const ld alpha = (n * n - 2 * n - 4) / (2 * n * (n - 1)) * S;
    const ld alpha_bar = (n - 4) * (n * n - 4) / (16 * n * (n - 1) * (n - 1)) * S * S;
    DiscriminantCheck chk;
    chk.lhs = static_cast<double>(alpha * alpha / 4 - alpha_bar);
    chk.rhs = static_cast<double>(S * S / (n * n * (n - 1) * (n - 1)));
    const double scale = std::max(std::abs(chk.rhs), 1e-300);
    chk.relative_error = std::abs(chk.lhs - chk.rhs) / scale;
    return chk;
}

double sharp_constant_inv_sq(int n) {
    require_dimension(n);
    const double dn = n;
    const double alpha_bar_round = dn * (dn - 4.0) * (dn * dn - 4.0) / 16.0;
    return alpha_bar_round * std::pow(unit_sphere_volume(n), 4.0 / dn);
}

SharpConstantReport sharp_constant_report(const EinsteinData& data) {
    require_dimension(data.n);
    const double n = data.n;
    SharpConstantReport r;
    r.n = data.n;
    r.oracle = sharp_constant_inv_sq(data.n);
    const double log_ratio = log_gamma(0.5 * n) - log_gamma(n);
    r.gamma_ratio_formula = kPi * kPi * n * (n - 1.0) * (n * n - 4.0) * std::exp(log_ratio);
    r.sphere_volume_formula = n * (n + 2.0) * (n - 2.0) * (n - 4.0) / 16.0 *
                              std::pow(unit_sphere_volume(data.n - 1), 4.0 / n);
    r.corrected_formula =
        kPi * kPi * n * (n - 4.0) * (n * n - 4.0) * std::exp(4.0 / n * log_ratio);
    r.ratio_gamma_to_oracle = r.gamma_ratio_formula / r.oracle;
    r.ratio_volume_to_oracle = r.sphere_volume_formula / r.oracle;
    r.ratio_gamma_to_volume = r.gamma_ratio_formula / r.sphere_volume_formula;
    r.ratio_corrected_to_oracle = r.corrected_formula / r.oracle;
    return r;
}

bool SharpConstantReport::discrepancy(double tol) const {
    return std::abs(ratio_gamma_to_oracle - 1.0) > tol || std::abs(ratio_volume_to_oracle - 1.0) > tol;
}

std::string SharpConstantReport::summary() const {
    std::ostringstream os;
    os.precision(12);
    os << "K2^-2 oracle (constant function on round S^" << n << "): " << oracle << '\n'
       << "  Gamma-ratio formula as printed:    " << gamma_ratio_formula
       << "  (ratio to oracle " << ratio_gamma_to_oracle << ")\n"
       << "  sphere-volume formula as printed:  " << sphere_volume_formula
       << "  (ratio to oracle " << ratio_volume_to_oracle << ")\n"
       << "  duplication-formula rewrite:       " << corrected_formula
       << "  (ratio to oracle " << ratio_corrected_to_oracle << ")\n";
    if (discrepancy()) os << "  DISCREPANCY: printed formulas do not reproduce the oracle\n";
    return os.str();
}

} // namespace paneitz
