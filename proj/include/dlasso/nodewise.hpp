#pragma once

#include "dlasso/lasso.hpp"

#include <Eigen/Dense>

#include <vector>

namespace dlasso {

/**
 * Node-wise Lasso of column j on the remaining columns.
 *
 * gamma follows the column order of X with column j removed.
 * tau_tilde_sq = ||X_j - X_{-j} gamma||^2 / n, tau_hat_sq = tau_tilde_sq + lambda ||gamma||_1,
 * theta = (1 at j, -gamma elsewhere) / tau_hat_sq.
 */
struct NodewiseFit {
    Eigen::Index target_index = 0;
    Eigen::VectorXd gamma;
    double lambda = 0.0;
    double tau_tilde_sq = 0.0;
    double tau_hat_sq = 0.0;
    Eigen::VectorXd theta;
    int iterations = 0;
};

struct TracePoint {
    double lambda;
    double f_value;
    double omega_value;
    double tau_tilde_sq;
};

/// Trace over a grid, ascending in lambda.
struct TuneTrace {
    std::vector<TracePoint> points;

    /// Largest decrease of f between consecutive points (0 when monotone).
    double f_decrease() const;
    /// Largest decrease of tau_tilde_sq between consecutive points.
    double tau_decrease() const;
};

/**
 * Shares one Gram matrix across every node-wise fit of a given design and target,
 * which is what the grid trace and the selectors need.
 * X must be centered columnwise.
 */
class NodewiseProblem {
public:
    NodewiseProblem(const Eigen::MatrixXd& X, Eigen::Index target);

    NodewiseFit fit(double lambda, const SolverConfig& cfg,
                    const Eigen::VectorXd* warm = nullptr) const;

    /// Fits every grid value (descending with warm starts) and returns them ascending.
    std::vector<NodewiseFit> fit_grid(const LambdaGrid& grid, const SolverConfig& cfg) const;

    /// max_{k != j} |X_k'X_j| / n.
    double lambda_max() const { return sub_.lambda_max(); }

    const Eigen::MatrixXd& X() const noexcept { return X_; }
    Eigen::Index target() const noexcept { return target_; }
    /// Design without the target column.
    const Eigen::MatrixXd& others() const noexcept { return others_; }

private:
    NodewiseFit assemble(Eigen::VectorXd gamma, double lambda, int iterations) const;

    Eigen::MatrixXd X_;
    Eigen::Index target_;
    Eigen::MatrixXd others_;
    LassoProblem sub_;
};

NodewiseFit fit_nodewise(const Eigen::MatrixXd& X, Eigen::Index j, double lambda,
                         const SolverConfig& cfg = {});

/// Theta' Sigma_hat Theta computed as ||X theta||^2 / n.
double omega(const NodewiseFit& fit, const Eigen::MatrixXd& X);
/// The same quantity through tau_tilde_sq / tau_hat_sq^2.
double omega_from_taus(const NodewiseFit& fit);

/// Sigma_hat theta - e_j.
Eigen::VectorXd precision_residual(const NodewiseFit& fit, const Eigen::MatrixXd& X);

/// ||Sigma_hat theta - e_j||_inf / sqrt(omega).
double bias_factor(const NodewiseFit& fit, const Eigen::MatrixXd& X);

TracePoint trace_point(const NodewiseFit& fit, const Eigen::MatrixXd& X);

TuneTrace trace_grid(const Eigen::MatrixXd& X, Eigen::Index j, const LambdaGrid& grid,
                     const SolverConfig& cfg = {});

}  // namespace dlasso
