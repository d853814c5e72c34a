#include "dlasso/cv.hpp"

#include "dlasso/errors.hpp"
#include "dlasso/rng.hpp"

#include <cmath>

namespace dlasso {

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("cross-validation needs at least 2 folds");
    if (static_cast<std::size_t>(k) > n)
        throw ArgumentError("fold count " + std::to_string(k) + " exceeds sample size " +
                            std::to_string(n));
    const auto folds = static_cast<std::size_t>(k);
    if (n / folds < 2) throw ArgumentError("every fold needs at least 2 rows");

    const auto order = shuffled_indices(n, seed);
    std::vector<int> label(n);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) label[order[pos++]] = static_cast<int>(f);
    }
    return label;
}

CvResult kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LambdaGrid& grid,
                  int k, std::uint64_t seed, const SolverConfig& cfg) {
    if (X.rows() != y.size()) throw ArgumentError("response length does not match design rows");
    const auto n = static_cast<std::size_t>(X.rows());
    const std::size_t m = grid.size();

    CvResult out;
    out.lambdas = grid.values();
    out.fold_assignment = assign_folds(n, k, seed);

    // fold_mse(f, l): held-out MSE of fold f at grid entry l.
    Eigen::MatrixXd fold_mse(k, static_cast<Eigen::Index>(m));
    for (int f = 0; f < k; ++f) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < n; ++i)
            (out.fold_assignment[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));

        const Eigen::MatrixXd X_train = X(train, Eigen::all);
        const Eigen::VectorXd y_train = y(train);
        const Eigen::RowVectorXd x_mean = X_train.colwise().mean();
        const double y_mean = y_train.mean();
        const Eigen::MatrixXd Xc = X_train.rowwise() - x_mean;
        const Eigen::VectorXd yc = y_train.array() - y_mean;

        const Eigen::MatrixXd X_test = X(test, Eigen::all).rowwise() - x_mean;
        const Eigen::VectorXd y_test = y(test).array() - y_mean;

        const LassoProblem problem(Xc, yc);
        const auto fits = fit_path(problem, grid, cfg);
        for (std::size_t l = 0; l < m; ++l) {
            const Eigen::VectorXd err = y_test - X_test * fits[l].beta;
            fold_mse(f, static_cast<Eigen::Index>(l)) = err.squaredNorm() / static_cast<double>(test.size());
        }
    }

    out.mse.resize(m);
    out.se.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
        const auto col = fold_mse.col(static_cast<Eigen::Index>(l));
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / (k - 1);
        out.mse[l] = mean;
        out.se[l] = std::sqrt(var / k);
    }

    // Grid is decreasing, so scanning forward and keeping strict improvements
    // leaves ties at the larger lambda.
    std::size_t best = 0;
    for (std::size_t l = 1; l < m; ++l)
        if (out.mse[l] < out.mse[best]) best = l;
    const double bound = out.mse[best] + out.se[best];
    std::size_t one_se = best;
    for (std::size_t l = 0; l <= best; ++l) {
        if (out.mse[l] <= bound) {
            one_se = l;
            break;
        }
    }
    out.index_min = best;
    out.index_1se = one_se;
    out.lambda_min = out.lambdas[best];
    out.lambda_1se = out.lambdas[one_se];
    return out;
}

CvResult kfold_cv(const Dataset& d, const LambdaGrid& grid, int k, std::uint64_t seed,
                  const SolverConfig& cfg) {
    return kfold_cv(d.X(), d.y(), grid, k, seed, cfg);
}

}  // namespace dlasso
