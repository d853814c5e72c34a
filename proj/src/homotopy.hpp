#pragma once

#include "dlasso/lasso.hpp"

#include <vector>

namespace dlasso::detail {

/**
 * Exact Lasso solutions at every value of `targets` (strictly decreasing, >= 0)
 * by following the piecewise-linear solution path from lambda_max with
 * variable joins and drops. Throws NumericError if the active Gram matrix
 * becomes singular.
 */
std::vector<Eigen::VectorXd> homotopy_path(const LassoProblem& problem,
                                           const std::vector<double>& targets);

}  // namespace dlasso::detail
