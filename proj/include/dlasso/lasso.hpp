#pragma once

#include "dlasso/dataset.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace dlasso {

/**
 * Stopping rules for coordinate descent.
 *
 * tol       largest absolute coefficient change allowed in a converged full sweep.
 * max_sweeps  hard cap on coordinate sweeps (full and active-set sweeps both count).
 * kkt_tol   largest stationarity violation accepted at termination.
 */
struct SolverConfig {
    double tol = 1e-9;
    int max_sweeps = 100000;
    double kkt_tol = 1e-7;

    void validate() const;
};

/// One penalized fit of (1/n)||y - X b||^2 + 2 lambda ||b||_1.
struct LassoFit {
    Eigen::VectorXd beta;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double kkt = 0.0;          ///< stationarity violation measured at termination
    std::string diagnostic;    ///< empty on success
};

/// Strictly decreasing positive penalty levels.
class LambdaGrid {
public:
    explicit LambdaGrid(std::vector<double> values);

    /// Sorts descending; rejects duplicates and non-positive values.
    static LambdaGrid from_unsorted(std::vector<double> values);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double largest() const { return values_.front(); }
    double smallest() const { return values_.back(); }

private:
    std::vector<double> values_;
};

/**
 * Least-squares problem in covariance form: G = X'X/n, c = X'y/n, yy = y'y/n.
 *
 * Coordinate descent keeps the gradient c - G b up to date instead of the residual,
 * so one problem can be re-solved cheaply along a path or restricted to a column subset.
 */
class LassoProblem {
public:
    LassoProblem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
    LassoProblem(Eigen::MatrixXd gram, Eigen::VectorXd xty, double yy, Eigen::Index n);

    LassoFit fit(double lambda, const SolverConfig& cfg,
                 const Eigen::VectorXd* warm = nullptr) const;

    /// Smallest lambda at which the zero vector is optimal: max_j |c_j|.
    double lambda_max() const;

    double objective(const Eigen::VectorXd& beta, double lambda) const;
    /// X'(y - X b)/n.
    Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
    double kkt_violation(const Eigen::VectorXd& beta, double lambda) const;

    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    const Eigen::VectorXd& xty() const noexcept { return xty_; }
    double yy() const noexcept { return yy_; }
    Eigen::Index n() const noexcept { return n_; }
    Eigen::Index p() const noexcept { return gram_.cols(); }

private:
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    double yy_;
    Eigen::Index n_;
};

/// Max KKT violation of beta for the problem (X, y) at lambda.
double kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda);

LassoFit fit_lasso(const Dataset& d, double lambda, const SolverConfig& cfg = {},
                   const std::optional<Eigen::VectorXd>& warm = std::nullopt);

/// `count` log-spaced values from max_j |X_j'y|/n down to ratio times that.
LambdaGrid lambda_path(const Dataset& d, int count, double ratio);
LambdaGrid lambda_path(double lambda_max, int count, double ratio);

/// Fits in grid order, each warm-started from the previous solution.
std::vector<LassoFit> fit_path(const Dataset& d, const LambdaGrid& grid,
                               const SolverConfig& cfg = {});
std::vector<LassoFit> fit_path(const LassoProblem& problem, const LambdaGrid& grid,
                               const SolverConfig& cfg = {});

double kkt_violation(const Dataset& d, const LassoFit& fit);

/// Soft-thresholding S(z, t) = sign(z) max(|z| - t, 0); |z| == t maps to 0.
inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace dlasso
