#pragma once

// Numerical audits of Sobolev-type inequalities. Every audit returns both
// sides and a verdict; nothing here assumes the inequality is true.

#include "paneitz/bubbles.hpp"
#include "paneitz/optimizer.hpp"
#include "paneitz/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace paneitz {

enum class Relation { LessEqual, GreaterEqual }; // claimed: lhs <= rhs, or lhs >= rhs
enum class Verdict { Holds, Violated, Boundary };

std::string to_string(Verdict v);

struct InequalityReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0; // lhs / rhs
    Relation relation = Relation::LessEqual;
    Verdict verdict = Verdict::Boundary;
    std::string fingerprint; // description of the inputs
};

/// Builds a report; the verdict compares the ratio with 1 -+ 1e-10.
InequalityReport make_report(std::string name, double lhs, double rhs, Relation rel, std::string fingerprint = {});

/// Radial quadrature on R^n: composite Gauss-Legendre on (0, R) plus a
/// Gauss rule in t = R/r for the tail (R, inf).
struct EuclideanRadialGrid {
    int n = 0;
    double R = 0.0;
    Eigen::VectorXd r;
    Eigen::VectorXd weights; // omega_{n-1} r^{n-1} dr (times the map Jacobian in the tail)
    int inner = 0;           // nodes [0, inner) lie in (0, R)

    /// Sum of the inner weights: the volume of the ball of radius R.
    double ball_volume() const { return weights.head(inner).sum(); }
};

EuclideanRadialGrid build_radial_grid(int n, double R = 100.0, int per_panel = 64, int tail_nodes = 96);

/// Gauss-Legendre nodes and weights on (-1, 1).
void gauss_legendre(int m, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

struct RadialProfile {
    std::string name;
    std::function<double(double)> f, d1, d2;
};

/// (1 + (r/s)^2)^{-(n-4)/2}, the extremal of the flat inequality.
RadialProfile euclidean_bubble(int n, double scale = 1.0);
/// (1 - (r/a)^2)^3 on r < a, zero outside (C^2, smooth at the origin).
RadialProfile core_bump(double a);
/// 64 (t(1-t))^3 with t = (r - r0)/(r1 - r0) on (r0, r1), zero outside.
RadialProfile shell_bump(double r0, double r1);

/// Flat radial Laplacian -f'' - (n-1) f'/r at the grid nodes.
Eigen::VectorXd radial_laplacian(const RadialProfile& p, const EuclideanRadialGrid& grid);

/// Fraction of int |f|^N carried by r > R.
double tail_fraction(const RadialProfile& p, const EuclideanRadialGrid& grid, double N);

/// int u^{N-2} v^2 dx <= 2^{-4/n} K2^2 int (Delta v)^2 dx (int u^N dx)^{2/N},
/// with u rescaled so int u^N = 1. Rejects profiles whose L^N tail beyond R
/// exceeds 1e-8 and names the radius that would suffice.
InequalityReport euclidean_refined_check(const EuclideanRadialGrid& grid, const RadialProfile& u,
                                           const RadialProfile& v);

/// sup over span(v1, v2) of int (Delta w)^2 / int u^{N-2} w^2, times
/// (int u^N)^{4/n}, against 2^{4/n} K2^{-2} (claimed >=).
InequalityReport euclidean_two_plane_check(const EuclideanRadialGrid& grid, const RadialProfile& u,
                                           const RadialProfile& v1, const RadialProfile& v2);

/// Which value of K2 an audit uses.
enum class SharpConstantSource { Oracle, PrintedGammaFormula };

struct SobolevEpsAudit {
    double eps = 0.0;
    double A_eps = 0.0;
    SharpConstantSource source = SharpConstantSource::Oracle;
    std::vector<InequalityReport> reports; // ||u||_N^2 <= (K2^2 + eps) ||Delta u||^2 + A ||u||^2
    std::vector<double> sharpness;          // ||u||_N^2 / (K2^2 ||Delta u||^2), inf when Delta u = 0
    double minimal_A = 0.0;                 // bisection: smallest A clearing every field
};

SobolevEpsAudit sobolev_eps_audit(double eps, double A_eps, const std::vector<ZonalField>& fields,
                         const OperatorCoefficients& coeffs, const ZonalBasis& basis,
                         SharpConstantSource source = SharpConstantSource::Oracle);

/// int u^{N-2} v^2 <= 2^{-4/n} K2^2 int v P v (int u^N)^{2/N} on the sphere.
/// u must be normalized (int u^N = 1).
InequalityReport refined_inequality_ratio(const ConformalDensity& u, const ZonalField& v,
                                          const OperatorCoefficients& coeffs, const ZonalBasis& basis);

/// lambda_2(u) (int u^N)^{4/n} >= 2^{4/n} K2^{-2} (1 + eps)^{-1}.
InequalityReport refined_lambda2_form(const ConformalDensity& u, const OperatorCoefficients& coeffs,
                                      const ZonalBasis& basis, double eps = 0.0);

struct MuRelationReport {
    int n = 0;
    double mu1_hat = 0.0; // optimizer, k = 1
    double mu_hat = 0.0;  // inf of Y over the trial family
    double product = 0.0; // mu1_hat K2^2
    double gap = 0.0;     // |mu_hat - mu1_hat|
    Verdict hypothesis = Verdict::Boundary; // product < 1 ?
    InequalityReport unconditional;          // mu1_hat <= mu_hat (1 + 1e-8)
    std::vector<std::string> family;
};

/// Trial family for mu-hat: the constant, bubbles at eps in {0.5, 1} when the
/// eigen basis resolves them (`with_bubbles`), and seeded random zonal fields.
MuRelationReport mu_relation_audit(const EinsteinData& data, const OptimizerConfig& config, int random_fields = 16,
                                   bool with_bubbles = true);

} // namespace paneitz
