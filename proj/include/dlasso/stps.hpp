#pragma once

#include "dlasso/lasso.hpp"
#include "dlasso/nodewise.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dlasso {

/// Candidate set for the node-wise penalty, ascending.
struct CandidateGrid {
    std::vector<double> values;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    /// Builds from arbitrary positive values; lambda_min/lambda_max are the extremes.
    static CandidateGrid from_values(std::vector<double> values);

    /// Descending copy suitable for path fitting.
    LambdaGrid descending() const;
};

enum class Branch {
    AllAbove,     ///< f exceeds the threshold everywhere; fall back to lambda_min
    Constrained,  ///< minimize f under the inflated variance cap
};

std::string to_string(Branch b);

struct StpsResult {
    double lambda1 = 0.0;
    double eta_star = 0.0;
    Branch branch = Branch::AllAbove;
    std::optional<double> lambda_star;
    std::optional<double> omega_star_half;
    TuneTrace trace;
    std::optional<double> cv_lambda;
    std::size_t selected = 0;  ///< index of lambda1 in trace.points
};

/// Variance-cap multiplier applied to sqrt(omega) at lambda*.
inline constexpr double kVarianceInflation = 1.1;

/**
 * Merges kappa/sqrt(n) * {1, ..., small_count} with a `path_size` log-spaced path
 * from lambda_max = max_{k != j} |X_k'X_j|/n. path_ratio <= 0 picks the usual
 * default: 0.01 when n < p - 1, otherwise 1e-4.
 */
CandidateGrid build_candidate_grid(const Eigen::MatrixXd& X, Eigen::Index j, double kappa = 0.001,
                                   int path_size = 100, double path_ratio = 0.0,
                                   int small_count = 20);

/// The two threshold-based selection rules applied to an assembled trace.
StpsResult select_from_trace(TuneTrace trace, double eta_star);

/// (eta_star, lambda_cv): lambda_cv minimizes node-wise CV error over the grid and
/// eta_star = tau_tilde(lambda_cv) / sqrt(n) from the full-data refit.
std::pair<double, double> eta_star(const Eigen::MatrixXd& X, Eigen::Index j,
                                   const CandidateGrid& grid, int k_folds, std::uint64_t seed,
                                   const SolverConfig& cfg = {});

StpsResult select_stps(const Eigen::MatrixXd& X, Eigen::Index j, const CandidateGrid& grid,
                       int k_folds, std::uint64_t seed, const SolverConfig& cfg = {});

/// Threshold sqrt(2 log p / n) with p = X.cols(); no cross-validation.
double zz_threshold(Eigen::Index n, Eigen::Index p);

StpsResult select_zz(const Eigen::MatrixXd& X, Eigen::Index j, const CandidateGrid& grid,
                     const SolverConfig& cfg = {});

/// MSE-minimizing node-wise lambda over the grid.
double select_cv_nodewise(const Eigen::MatrixXd& X, Eigen::Index j, const CandidateGrid& grid,
                          int k_folds, std::uint64_t seed, const SolverConfig& cfg = {});

/// tau1 * sqrt(2 log p / n).
double universal_lambda(double tau1, Eigen::Index n, Eigen::Index p);

}  // namespace dlasso
