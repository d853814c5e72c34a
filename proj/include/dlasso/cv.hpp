#pragma once

#include "dlasso/dataset.hpp"
#include "dlasso/lasso.hpp"

#include <cstdint>
#include <vector>

namespace dlasso {

/// K-fold cross-validation summary over a LambdaGrid (entries follow grid order).
struct CvResult {
    std::vector<double> lambdas;
    std::vector<double> mse;
    std::vector<double> se;
    std::vector<int> fold_assignment;
    double lambda_min = 0.0;
    double lambda_1se = 0.0;
    std::size_t index_min = 0;
    std::size_t index_1se = 0;
};

/// Fold labels: seeded shuffle, then contiguous near-equal blocks (larger blocks first).
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed);

/**
 * Cross-validates the Lasso on raw (uncentered) data. Each training split is
 * centered with its own means and the held-out block is predicted through them.
 * se(lambda) is the sample standard deviation of the k fold MSEs over sqrt(k).
 * Both selection rules break ties toward the larger lambda.
 */
CvResult kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LambdaGrid& grid,
                  int k, std::uint64_t seed, const SolverConfig& cfg = {});

CvResult kfold_cv(const Dataset& d, const LambdaGrid& grid, int k, std::uint64_t seed,
                  const SolverConfig& cfg = {});

}  // namespace dlasso
