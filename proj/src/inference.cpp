#include "dlasso/inference.hpp"

#include "dlasso/cv.hpp"
#include "dlasso/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace dlasso {

std::string to_string(Alternative a) {
    switch (a) {
        case Alternative::Less: return "less";
        case Alternative::Greater: return "greater";
        default: return "two-sided";
    }
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("normal quantile needs p in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double residual_sigma(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta) {
    const double rss = (y - X * beta).squaredNorm();
    if (!(rss > 0.0)) throw NumericError("residual vector is zero; noise scale is degenerate");
    return std::sqrt(rss / static_cast<double>(X.rows()));
}

double sigma_hat_1se(const Dataset& d, const LambdaGrid& grid, int k, std::uint64_t seed,
                     const SolverConfig& cfg) {
    if (!d.centered()) throw ArgumentError("sigma_hat_1se expects a centered dataset");
    const auto cv = kfold_cv(d, grid, k, seed, cfg);
    const auto fit = fit_lasso(d, cv.lambda_1se, cfg);
    return residual_sigma(d.X(), d.y(), fit.beta);
}

InferenceResult debias(const Dataset& d, const LassoFit& lasso, const NodewiseFit& node,
                       double sigma_hat, double level, Alternative alternative) {
    if (!d.centered()) throw ArgumentError("debias expects a centered dataset");
    if (lasso.beta.size() != d.p() || node.theta.size() != d.p())
        throw ArgumentError("debias: coefficient lengths do not match the design");
    if (!(sigma_hat > 0.0)) throw ArgumentError("sigma_hat must be positive");
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0,1)");

    const double n = static_cast<double>(d.n());
    const Eigen::Index j = node.target_index;
    InferenceResult out;
    out.target = j;
    out.omega = omega(node, d.X());
    if (!(out.omega > 0.0)) throw NumericError("variance factor omega is not positive");

    const Eigen::VectorXd residual = d.y() - d.X() * lasso.beta;
    out.beta1_lasso = lasso.beta(j);
    out.b1 = out.beta1_lasso + node.theta.dot(d.X().transpose() * residual) / n;
    out.sigma_hat = sigma_hat;
    out.std_error = sigma_hat * std::sqrt(out.omega) / std::sqrt(n);
    out.level = level;
    const double z = normal_quantile(0.5 + level / 2.0);
    out.ci_lower = out.b1 - z * out.std_error;
    out.ci_upper = out.b1 + z * out.std_error;
    out.t_stat = out.b1 / out.std_error;
    out.alternative = alternative;
    switch (alternative) {
        case Alternative::TwoSided: out.p_value = 2.0 * (1.0 - normal_cdf(std::abs(out.t_stat))); break;
        case Alternative::Less: out.p_value = normal_cdf(out.t_stat); break;
        case Alternative::Greater: out.p_value = 1.0 - normal_cdf(out.t_stat); break;
    }
    out.lambda0 = lasso.lambda;
    out.lambda1 = node.lambda;
    return out;
}

Decomposition decomposition_check(const Dataset& d, const LassoFit& lasso,
                                  const NodewiseFit& node, const Eigen::VectorXd& beta0,
                                  const Eigen::VectorXd& eps) {
    if (beta0.size() != d.p() || lasso.beta.size() != d.p() || node.theta.size() != d.p() ||
        eps.size() != d.n())
        throw ArgumentError("decomposition_check: shape mismatch");
    const double n = static_cast<double>(d.n());
    const double root_n = std::sqrt(n);
    const Eigen::Index j = node.target_index;

    Decomposition out;
    out.w1 = node.theta.dot(d.X().transpose() * eps) / root_n;
    out.delta1 = root_n * precision_residual(node, d.X()).dot(beta0 - lasso.beta);
    const Eigen::VectorXd residual = d.y() - d.X() * lasso.beta;
    const double b1 = lasso.beta(j) + node.theta.dot(d.X().transpose() * residual) / n;
    out.scaled_error = root_n * (b1 - beta0(j));
    out.holder_bound = root_n * node.lambda / node.tau_hat_sq * (lasso.beta - beta0).lpNorm<1>();
    return out;
}

}  // namespace dlasso
