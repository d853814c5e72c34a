#include "doctest.h"
#include "support.hpp"

#include "dlasso/errors.hpp"
#include "dlasso/inference.hpp"
#include "dlasso/nodewise.hpp"

#include <cmath>

using namespace dlasso;
using testing::centered;
using testing::gaussian_matrix;
using testing::gaussian_vector;

TEST_CASE("normal helpers") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(normal_quantile(1.0), ArgumentError);
    CHECK_THROWS_AS(normal_quantile(0.0), ArgumentError);
}

TEST_CASE("exact inverse makes the debiased estimate the least-squares coefficient") {
    const auto inst = testing::sparse_instance(100, 30, 5);
    const Dataset d(inst.y, inst.X, true);
    const Eigen::VectorXd ols = inst.X.colPivHouseholderQr().solve(inst.y);
    const auto node = fit_nodewise(inst.X, 0, 0.0);
    const double lmax = (inst.X.transpose() * inst.y).lpNorm<Eigen::Infinity>() / 100.0;
    for (const double scale : {0.01, 0.1, 1.0}) {
        const auto lasso = fit_lasso(d, scale * lmax);
        const auto r = debias(d, lasso, node, 1.0);
        CHECK(std::abs(r.b1 - ols(0)) <= 1e-8);
    }
    const auto ls = fit_lasso(d, 0.0);
    const auto r = debias(d, ls, node, 1.0);
    CHECK(std::abs(r.b1 - r.beta1_lasso) <= 1e-8);
}

TEST_CASE("inference result invariants") {
    const auto inst = testing::sparse_instance(80, 120, 6);
    const Dataset d(inst.y, inst.X, true);
    const auto lasso = fit_lasso(d, 0.1);
    const auto node = fit_nodewise(inst.X, 0, 0.05);
    const auto r = debias(d, lasso, node, 1.2, 0.9);
    const Eigen::VectorXd resid = inst.y - inst.X * lasso.beta;
    CHECK(std::abs(r.b1 - (lasso.beta(0) + node.theta.dot(inst.X.transpose() * resid) / 80.0)) <= 1e-10);
    CHECK(std::abs((r.ci_upper - r.ci_lower) - 2.0 * normal_quantile(0.95) * r.std_error) <= 1e-12);
    CHECK(std::abs(r.p_value - 2.0 * (1.0 - normal_cdf(std::abs(r.t_stat)))) <= 1e-12);
    CHECK(r.std_error == doctest::Approx(1.2 * std::sqrt(omega(node, inst.X) / 80.0)));
    CHECK(r.std_error > 0.0);
    CHECK(r.lambda0 == 0.1);
    CHECK(r.lambda1 == 0.05);

    const auto wide = debias(d, lasso, node, 1.2, 0.99);
    CHECK(wide.ci_lower < r.ci_lower);
    CHECK(wide.ci_upper > r.ci_upper);

    const auto less = debias(d, lasso, node, 1.2, 0.95, Alternative::Less);
    const auto greater = debias(d, lasso, node, 1.2, 0.95, Alternative::Greater);
    CHECK(less.p_value + greater.p_value == doctest::Approx(1.0));
    CHECK(less.p_value == doctest::Approx(normal_cdf(r.t_stat)));

    CHECK_THROWS_AS(debias(d, lasso, node, 0.0), ArgumentError);
    CHECK_THROWS_AS(debias(d, lasso, node, 1.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(debias(Dataset(inst.y, inst.X, false), lasso, node, 1.0), ArgumentError);
}

TEST_CASE("noise scale from the one-SE refit") {
    const Eigen::MatrixXd X = centered(gaussian_matrix(40, 5, 7));
    const Dataset zero(Eigen::VectorXd::Zero(40), X, true);
    CHECK_THROWS_AS(residual_sigma(X, Eigen::VectorXd::Zero(40), Eigen::VectorXd::Zero(5)), NumericError);

    int pass = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::MatrixXd Z = centered(gaussian_matrix(500, 50, 300 + seed));
        const Eigen::VectorXd y = centered(gaussian_vector(500, 400 + seed));
        const Dataset d(y, Z, true);
        const auto grid = lambda_path(d, 50, 0.01);
        const double s = sigma_hat_1se(d, grid, 10, seed);
        if (std::abs(s * s - 1.0) <= 0.15) ++pass;
        if (seed == 0) CHECK(sigma_hat_1se(d, grid, 10, seed) == s);
    }
    CHECK(pass >= 18);
}

TEST_CASE("error decomposition") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd X = centered(gaussian_matrix(60, 100, 500 + seed));
        Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(100);
        beta0.head(4) << 1.5, 1.0, -1.0, 0.5;
        const Eigen::VectorXd eps = centered(gaussian_vector(60, 600 + seed));
        const Eigen::VectorXd y = X * beta0 + eps;
        const Dataset d(y, X, true);
        const auto lasso = fit_lasso(d, 0.1);
        const auto node = fit_nodewise(X, 0, 0.02);
        const auto dec = decomposition_check(d, lasso, node, beta0, eps);
        CHECK(std::abs(dec.w1 + dec.delta1 - dec.scaled_error) <= 1e-9);
        CHECK(std::abs(dec.delta1) <= dec.holder_bound + 1e-9);
    }
    const Eigen::MatrixXd X = centered(gaussian_matrix(30, 10, 9));
    Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(10);
    beta0(0) = 1.5;
    const Dataset d(X * beta0, X, true);
    LassoFit exact;
    exact.beta = beta0;
    const auto node = fit_nodewise(X, 0, 0.1);
    const auto dec = decomposition_check(d, exact, node, beta0, Eigen::VectorXd::Zero(30));
    CHECK(dec.w1 == 0.0);
    CHECK(dec.delta1 == 0.0);
    CHECK_THROWS_AS(decomposition_check(d, exact, node, beta0, Eigen::VectorXd::Zero(3)), ArgumentError);
}
