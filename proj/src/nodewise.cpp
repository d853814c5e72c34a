#include "dlasso/nodewise.hpp"

#include "dlasso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dlasso {

namespace {

Eigen::MatrixXd drop_column(const Eigen::MatrixXd& X, Eigen::Index j) {
    Eigen::MatrixXd out(X.rows(), X.cols() - 1);
    out.leftCols(j) = X.leftCols(j);
    out.rightCols(X.cols() - j - 1) = X.rightCols(X.cols() - j - 1);
    return out;
}

void require_centered(const Eigen::MatrixXd& X) {
    const double n = static_cast<double>(X.rows());
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double mean = X.col(k).sum() / n;
        const double rms = X.col(k).norm() / std::sqrt(n);
        if (std::abs(mean) > 1e-8 * std::max(rms, 1e-300))
            throw ArgumentError("node-wise regression expects a columnwise-centered design");
    }
}

Eigen::Index checked_target(const Eigen::MatrixXd& X, Eigen::Index target) {
    if (X.cols() < 2) throw ArgumentError("node-wise regression needs at least 2 columns");
    if (target < 0 || target >= X.cols())
        throw ArgumentError("target column " + std::to_string(target) + " out of range");
    require_centered(X);
    return target;
}

std::string format_lambda(double lambda) {
    std::ostringstream os;
    os.precision(17);
    os << lambda;
    return os.str();
}

}  // namespace

double TuneTrace::f_decrease() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        worst = std::max(worst, points[i - 1].f_value - points[i].f_value);
    return worst;
}

double TuneTrace::tau_decrease() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        worst = std::max(worst, points[i - 1].tau_tilde_sq - points[i].tau_tilde_sq);
    return worst;
}

NodewiseProblem::NodewiseProblem(const Eigen::MatrixXd& X, Eigen::Index target)
    : X_(X),
      target_(checked_target(X, target)),
      others_(drop_column(X, target)),
      sub_(others_, X.col(target)) {}

NodewiseFit NodewiseProblem::assemble(Eigen::VectorXd gamma, double lambda, int iterations) const {
    const double n = static_cast<double>(X_.rows());
    NodewiseFit fit;
    fit.target_index = target_;
    fit.lambda = lambda;
    fit.iterations = iterations;
    fit.tau_tilde_sq = (X_.col(target_) - others_ * gamma).squaredNorm() / n;
    if (!(fit.tau_tilde_sq >= 1e-14))
        throw NumericError("node-wise residual variance " + format_lambda(fit.tau_tilde_sq) +
                           " is degenerate at lambda=" + format_lambda(lambda));
    fit.tau_hat_sq = fit.tau_tilde_sq + lambda * gamma.lpNorm<1>();
    fit.theta.resize(X_.cols());
    fit.theta(target_) = 1.0;
    for (Eigen::Index k = 0, g = 0; k < X_.cols(); ++k)
        if (k != target_) fit.theta(k) = -gamma(g++);
    fit.theta /= fit.tau_hat_sq;
    fit.gamma = std::move(gamma);
    return fit;
}

NodewiseFit NodewiseProblem::fit(double lambda, const SolverConfig& cfg,
                                 const Eigen::VectorXd* warm) const {
    if (!(lambda >= 0.0)) throw ArgumentError("node-wise lambda must be nonnegative");
    if (lambda == 0.0) {
        if (others_.cols() >= others_.rows())
            throw NumericError("lambda = 0 needs fewer regressors than observations");
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others_);
        if (qr.rank() < others_.cols())
            throw NumericError("node-wise least squares is rank deficient");
        return assemble(qr.solve(Eigen::VectorXd(X_.col(target_))), 0.0, 0);
    }
    LassoFit lf = sub_.fit(lambda, cfg, warm);
    if (!lf.converged) throw NumericError("node-wise lasso: " + lf.diagnostic);
    return assemble(std::move(lf.beta), lambda, lf.iterations);
}

std::vector<NodewiseFit> NodewiseProblem::fit_grid(const LambdaGrid& grid,
                                                   const SolverConfig& cfg) const {
    std::vector<NodewiseFit> fits;
    fits.reserve(grid.size());
    for (auto& lf : fit_path(sub_, grid, cfg)) {
        try {
            if (!lf.converged) throw NumericError("node-wise lasso: " + lf.diagnostic);
            fits.push_back(assemble(std::move(lf.beta), lf.lambda, lf.iterations));
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (grid lambda=" + format_lambda(lf.lambda) + ")");
        }
    }
    std::reverse(fits.begin(), fits.end());
    return fits;
}

NodewiseFit fit_nodewise(const Eigen::MatrixXd& X, Eigen::Index j, double lambda,
                         const SolverConfig& cfg) {
    return NodewiseProblem(X, j).fit(lambda, cfg);
}

double omega(const NodewiseFit& fit, const Eigen::MatrixXd& X) {
    if (fit.theta.size() != X.cols()) throw ArgumentError("omega: shapes disagree");
    return (X * fit.theta).squaredNorm() / static_cast<double>(X.rows());
}

double omega_from_taus(const NodewiseFit& fit) {
    return fit.tau_tilde_sq / (fit.tau_hat_sq * fit.tau_hat_sq);
}

Eigen::VectorXd precision_residual(const NodewiseFit& fit, const Eigen::MatrixXd& X) {
    if (fit.theta.size() != X.cols()) throw ArgumentError("precision_residual: shapes disagree");
    Eigen::VectorXd r = X.transpose() * (X * fit.theta) / static_cast<double>(X.rows());
    r(fit.target_index) -= 1.0;
    return r;
}

double bias_factor(const NodewiseFit& fit, const Eigen::MatrixXd& X) {
    const double om = omega(fit, X);
    if (!(om > 0.0)) throw NumericError("variance factor is not positive");
    return precision_residual(fit, X).lpNorm<Eigen::Infinity>() / std::sqrt(om);
}

TracePoint trace_point(const NodewiseFit& fit, const Eigen::MatrixXd& X) {
    return {fit.lambda, bias_factor(fit, X), omega(fit, X), fit.tau_tilde_sq};
}

TuneTrace trace_grid(const Eigen::MatrixXd& X, Eigen::Index j, const LambdaGrid& grid,
                     const SolverConfig& cfg) {
    const NodewiseProblem problem(X, j);
    TuneTrace trace;
    for (const auto& fit : problem.fit_grid(grid, cfg)) trace.points.push_back(trace_point(fit, X));
    return trace;
}

}  // namespace dlasso
