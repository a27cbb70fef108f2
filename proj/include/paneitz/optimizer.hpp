#pragma once

// Minimization of the normalized eigenvalues
//
//     lambda-bar_k(u) = lambda_k(u) (int u^N)^{4/n},   u = q^2,
//
// over zonal densities, q = sum_{l <= L_opt} c_l Z_l. lambda-bar_k is
// invariant under c -> t c, so the search runs on the sphere int q^{2N} = 1.

#include "paneitz/eigen_toolkit.hpp"
#include "paneitz/spectral.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace paneitz {

/// Objective and gradient of lambda-bar_k in the coefficients of q.
///
/// Densities are parameterized on a degree-L_opt basis, eigenvalues are
/// computed on a separate degree-L_eig basis sharing the same rule.
class InvariantObjective {
public:
    InvariantObjective(const OperatorCoefficients& coeffs, std::shared_ptr<const QuadratureRule> rule, int L_opt,
                       int L_eig);

    struct Evaluation {
        double value = 0.0;              // lambda-bar_k (possibly smoothed, see `smoothed`)
        double exact = 0.0;              // lambda-bar_k itself
        std::vector<double> normalized;  // lambda-bar_1 .. lambda-bar_{k+1}
        Eigen::VectorXd gradient;        // d value / d c
        bool gap_isolated = true;        // lambda_k separated from its neighbours by gap_tol
        bool smoothed = false;           // value/gradient come from the log-sum-exp surrogate
        ConformalDensity density;        // normalized
        GeneralizedSpectrum spectrum;
        double lN_mass = 0.0;
    };

    /// `tau` > 0 enables log-sum-exp smoothing (relative temperature) when the
    /// gap around lambda_k is below `gap_tol`.
    Evaluation evaluate(const Eigen::VectorXd& c, int k, bool with_gradient = true, double tau = 0.0,
                        double gap_tol = 1e-6) const;
    double value(const Eigen::VectorXd& c, int k) const;
    /// Rescales c so that int q^{2N} = 1.
    Eigen::VectorXd normalize(const Eigen::VectorXd& c) const;

    const ZonalBasis& density_basis() const { return qbasis_; }
    const ZonalBasis& eigen_basis() const { return ebasis_; }
    const OperatorCoefficients& coefficients() const { return coeffs_; }

private:
    /// Gradient of lambda-bar_i (0-based) from its B-normalized eigenfield.
    Eigen::VectorXd eigen_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& v, double lambda,
                                   double mass) const;

    OperatorCoefficients coeffs_;
    ZonalBasis qbasis_;
    ZonalBasis ebasis_;
    StiffnessForm stiffness_;
};

/// Two bubbles at the poles: u = split^{1/N} b_N + (1 - split)^{1/N} b_S,
/// each bubble (2(1 -+ x) + eps^2)^{-(n-4)/2} normalized in L^N; returns the
/// normalized coefficients of sqrt(u) projected to `basis`.
Eigen::VectorXd two_bubble_initializer(const ZonalBasis& basis, const OperatorCoefficients& coeffs, double eps,
                                       double split);

struct OptimizerConfig {
    int k = 2;
    int L_opt = 16;
    int L_eig = 48;
    int q = 200;
    int restarts = 8; // random starts in addition to the two-bubble start
    int max_iter = 500;
    std::uint64_t seed = 0;
    double init_eps = 0.3;
    double init_split = 0.5;
    double gap_tol = 1e-6;
    double tau0 = 1e-3;    // initial smoothing temperature, relative to lambda-bar_k
    double tau_decay = 0.9;
    int memory = 10;       // L-BFGS pairs
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double grad_tol = 1e-10; // relative projected gradient norm
    bool parallel = true;
};

struct TraceEntry {
    int iter = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    double gap = 0.0; // lambda-bar_2 - lambda-bar_1
    double fixed_point_residual = 0.0;
    double wall_time = 0.0;
    bool smoothed = false;
};

struct RunTrace {
    int run = 0;
    std::uint64_t seed = 0;
    std::string initializer; // "two-bubble" or "random"
    std::vector<TraceEntry> entries;
    std::string status;
    std::vector<std::string> annotations;
    Eigen::VectorXd initial_coeffs;
    Eigen::VectorXd final_coeffs;
    double initial_objective = 0.0;
    double final_objective = 0.0;
};

struct MinimizeResult {
    int n = 0;
    int k = 0;
    Eigen::VectorXd best_coeffs;
    double best_objective = 0.0;
    std::vector<double> best_normalized; // lambda-bar_1 .. lambda-bar_{k+1} at the best density
    int best_run = 0;
    std::vector<RunTrace> traces; // ordered by run index (and therefore seed)
    double K2_inv_sq = 0.0;
    double existence_ratio = 0.0;    // mu2-hat K2^2 2^{-4/n}; below 1 is the existence hypothesis
    double second_invariant_target = 0.0; // 2^{4/n} K2^{-2} on the round sphere
    double second_invariant_ratio = 0.0;  // best_objective / second_invariant_target
};

/// Runs the two-bubble start plus `restarts` seeded random starts.
MinimizeResult minimize(const InvariantObjective& objective, const OptimizerConfig& config);

/// Single descent from c0.
RunTrace descend(const InvariantObjective& objective, const OptimizerConfig& config, Eigen::VectorXd c0);

} // namespace paneitz
