#pragma once

#include "dlasso/dataset.hpp"
#include "dlasso/lasso.hpp"
#include "dlasso/nodewise.hpp"

#include <cstdint>
#include <string>

namespace dlasso {

enum class Alternative { TwoSided, Less, Greater };

std::string to_string(Alternative a);

struct InferenceResult {
    Eigen::Index target = 0;
    double b1 = 0.0;           ///< debiased estimate
    double beta1_lasso = 0.0;  ///< Lasso coefficient of the target
    double omega = 0.0;
    double sigma_hat = 0.0;
    double std_error = 0.0;
    double level = 0.95;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    Alternative alternative = Alternative::TwoSided;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
};

double normal_cdf(double x);
double normal_quantile(double p);

/// sqrt(||y - X beta||^2 / n); throws NumericError when the residual vanishes.
double residual_sigma(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta);

/// Noise scale from the Lasso refit at the one-standard-error CV choice.
double sigma_hat_1se(const Dataset& d, const LambdaGrid& grid, int k, std::uint64_t seed,
                     const SolverConfig& cfg = {});

/**
 * b1 = beta_j + theta' X'(y - X beta) / n with standard error sigma * sqrt(omega / n);
 * the interval uses normal quantiles and the test is against beta_j = 0.
 */
InferenceResult debias(const Dataset& d, const LassoFit& lasso, const NodewiseFit& node,
                       double sigma_hat, double level = 0.95,
                       Alternative alternative = Alternative::TwoSided);

/// Pieces of sqrt(n)(b1 - beta0_j) when the truth is known.
struct Decomposition {
    double w1 = 0.0;       ///< theta' X' eps / sqrt(n)
    double delta1 = 0.0;   ///< sqrt(n) (Sigma_hat theta - e_j)'(beta0 - beta_hat)
    double scaled_error = 0.0;  ///< sqrt(n)(b1 - beta0_j)
    double holder_bound = 0.0;  ///< sqrt(n) lambda1 / tau_hat^2 * ||beta_hat - beta0||_1
};

Decomposition decomposition_check(const Dataset& d, const LassoFit& lasso,
                                  const NodewiseFit& node, const Eigen::VectorXd& beta0,
                                  const Eigen::VectorXd& eps);

}  // namespace dlasso
