#include "doctest.h"
#include "support.hpp"

#include "dlasso/errors.hpp"
#include "dlasso/simulation.hpp"

#include <cmath>
#include <sstream>

using namespace dlasso;

namespace {

double empirical_r2(const Eigen::VectorXd& signal, const Eigen::VectorXd& noise) {
    const Eigen::VectorXd y = signal + noise;
    const double vy = (y.array() - y.mean()).square().mean();
    const double vs = (signal.array() - signal.mean()).square().mean();
    return vs / vy;
}

}  // namespace

TEST_CASE("covariance structures") {
    const auto T = build_sigma(SigmaStructure::Toeplitz, 0.9, 3);
    Eigen::Matrix3d expect;
    expect << 1, .9, .81, .9, 1, .9, .81, .9, 1;
    CHECK((T - expect).cwiseAbs().maxCoeff() < 1e-15);
    const auto E = build_sigma(SigmaStructure::Equicorr, 0.3, 2);
    CHECK(E(0, 1) == 0.3);
    CHECK(E(1, 1) == 1.0);
    CHECK(build_sigma(SigmaStructure::Identity, 0.3, 4).isIdentity(0.0));
    for (const auto s : {SigmaStructure::Identity, SigmaStructure::Toeplitz, SigmaStructure::Equicorr})
        for (const double rho : {0.3, 0.9}) CHECK_NOTHROW(cholesky_factor(build_sigma(s, rho, 401)));
    CHECK_THROWS_AS(build_sigma(SigmaStructure::Toeplitz, 1.0, 3), ArgumentError);
    CHECK_THROWS_AS(build_sigma(SigmaStructure::Equicorr, -0.2, 3), ArgumentError);
    CHECK_THROWS_AS(build_sigma(SigmaStructure::Identity, 0.3, 0), ArgumentError);
    Eigen::Matrix2d singular;
    singular << 1, 1, 1, 1;
    CHECK_THROWS_AS(cholesky_factor(singular), NumericError);
}

TEST_CASE("coefficient patterns") {
    const auto sparse = build_beta(BetaPattern::Sparse, 20, 1.0);
    CHECK(sparse(0) == 1.5);
    CHECK((sparse.array() != 0.0).count() == 6);
    const auto moderate = build_beta(BetaPattern::Moderate, 30, 0.2);
    for (int k = 1; k <= 10; ++k) CHECK(moderate(k) == doctest::Approx(1.0));
    for (int k = 11; k <= 20; ++k) CHECK(moderate(k) == doctest::Approx(0.2));
    CHECK(moderate.tail(9).isZero(0.0));
    CHECK_THROWS_AS(build_beta(BetaPattern::Moderate, 20, 0.2), ArgumentError);
    const auto dense = build_beta(BetaPattern::Dense, 5, 0.0);
    CHECK(dense(0) == 1.5);
    CHECK(dense.tail(4).isZero(0.0));
    const auto dense2 = build_beta(BetaPattern::Dense, 5, 2.0);
    CHECK(dense2(1) == 2.0);
    CHECK(dense2(4) == doctest::Approx(1.0));
    const auto gs = build_gamma(GammaPattern::Sparse, 10, 0.5);
    CHECK(gs.head(4).isZero(0.0));
    CHECK((gs.segment(4, 4).array() == 0.5).all());
    CHECK(gs.tail(2).isZero(0.0));
    CHECK(build_gamma(GammaPattern::Sparse, 10, 0.0).isZero(0.0));
    const auto gd = build_gamma(GammaPattern::Dense, 4, 1.0);
    CHECK(gd(0) == 1.0);
    CHECK(gd(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK_THROWS_AS(build_gamma(GammaPattern::Sparse, 7, 1.0), ArgumentError);
}

TEST_CASE("closed-form calibration values") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(201, 201);
    CHECK(calibrate_cy(BetaPattern::Sparse, I, 0.8) == doctest::Approx(std::sqrt(1.75 / 5.0)).epsilon(1e-12));
    // Fixed part alone hits the target: 2.25 = r2/(1-r2) at r2 = 0.692307...
    CHECK(calibrate_cy(BetaPattern::Sparse, I, 2.25 / 3.25) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(calibrate_cy(BetaPattern::Sparse, I, 0.5), NumericError);
    CHECK_THROWS_AS(calibrate_cy(BetaPattern::Sparse, I, 1.0), ArgumentError);
    CHECK(calibrate_cx(GammaPattern::Sparse, Eigen::MatrixXd::Identity(200, 200), 0.5) == doctest::Approx(0.5));
    CHECK(calibrate_cx(GammaPattern::Dense, Eigen::MatrixXd::Identity(200, 200), 1e-12) < 1e-5);
}

TEST_CASE("population residual variance of the first coordinate") {
    CHECK(population_tau1_sq(build_sigma(SigmaStructure::Identity, 0.3, 201)) == 1.0);
    CHECK(std::abs(population_tau1_sq(build_sigma(SigmaStructure::Toeplitz, 0.9, 201)) - 0.19) <= 1e-12);
    CHECK(std::abs(population_tau1_sq(build_sigma(SigmaStructure::Toeplitz, 0.9, 2)) - 0.19) <= 1e-12);
    const double d = 201, rho = 0.3;
    const double closed = 1.0 - rho * rho * (d - 1) / (1.0 + (d - 2) * rho);
    CHECK(population_tau1_sq(build_sigma(SigmaStructure::Equicorr, rho, 201)) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(std::abs(closed - 0.701) <= 0.005);
}

TEST_CASE("calibrated signal variance") {
    const Eigen::Index dim = 201;
    for (const auto s : {SigmaStructure::Identity, SigmaStructure::Toeplitz, SigmaStructure::Equicorr})
        for (const double rho : {0.3, 0.9}) {
            const Eigen::MatrixXd Sigma = build_sigma(s, rho, dim);
            for (const auto pat : {BetaPattern::Sparse, BetaPattern::Moderate, BetaPattern::Dense}) {
                const Eigen::VectorXd beta = build_beta(pat, dim, calibrate_cy(pat, Sigma, 0.8));
                double q = 0.0;
                for (Eigen::Index i = 0; i < dim; ++i)
                    for (Eigen::Index k = 0; k < dim; ++k) q += beta(i) * Sigma(i, k) * beta(k);
                CHECK(q / (1.0 + q) == doctest::Approx(0.8).epsilon(1e-12));
            }
        }
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(200, 200);
    for (const auto pat : {GammaPattern::Sparse, GammaPattern::Dense})
        for (const double r2 : {0.3, 0.5, 0.8, 0.9}) {
            const double q = build_gamma(pat, 200, calibrate_cx(pat, I, r2)).squaredNorm();
            CHECK(q / (1.0 + q) == doctest::Approx(r2).epsilon(1e-12));
        }
}

TEST_CASE("empirical R squared at n = 5000, identity design") {
    const Eigen::MatrixXd X = testing::gaussian_matrix(5000, 201, 12);
    const Eigen::VectorXd eps = testing::gaussian_vector(5000, 13);
    const Eigen::VectorXd beta =
        build_beta(BetaPattern::Sparse, 201, calibrate_cy(BetaPattern::Sparse, Eigen::MatrixXd::Identity(201, 201), 0.8));
    CHECK(std::abs(empirical_r2(X * beta, eps) - 0.8) <= 0.02);
}

TEST_CASE("multivariate normal sampling") {
    RandomStream a(3), b(3);
    const Eigen::MatrixXd L = cholesky_factor(build_sigma(SigmaStructure::Toeplitz, 0.5, 4));
    const Eigen::MatrixXd A = sample_mvn(L, 50, a);
    const Eigen::MatrixXd B = sample_mvn(L, 50, b);
    CHECK(A == B);
    RandomStream c(4);
    const Eigen::MatrixXd big = sample_mvn(Eigen::MatrixXd::Identity(3, 3), 10000, c);
    const Eigen::MatrixXd cov = big.transpose() * big / 10000.0;
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("phi_max diagnostic") {
    const Eigen::MatrixXd X = testing::gaussian_matrix(1000, 10, 5);
    const double v = phi_max_1(X);
    CHECK(v > 0.8);
    CHECK(v < 1.3);
    Eigen::MatrixXd Y = X;
    Y.col(2) *= 2.0;
    CHECK(phi_max_1(Y) >= 4.0 * X.col(2).squaredNorm() / 1000.0 - 1e-12);
    CHECK(phi_max_1(Eigen::MatrixXd::Ones(7, 1)) == 1.0);
}

TEST_CASE("design draws") {
    SimConfig cfg;
    cfg.n = 30;
    cfg.p = 60;
    const auto design = build_design(cfg);
    const auto draw = draw_data(cfg, design, 17);
    CHECK(draw.X.rows() == 30);
    CHECK(draw.X.cols() == 61);
    const Eigen::VectorXd intercept = draw.y - draw.X * draw.beta0 - draw.eps;
    CHECK((intercept.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(draw_data(cfg, design, 17).X == draw.X);

    SimConfig two = cfg;
    two.setting = Setting::Two;
    two.gamma_pattern = GammaPattern::Dense;
    two.r2_x = 0.8;
    const auto d2 = build_design(two);
    CHECK(d2.tau1_sq == 1.0);
    CHECK(d2.gamma0.size() == 60);
    CHECK(d2.c_y > 0.0);
    const auto draw2 = draw_data(two, d2, 3);
    CHECK(draw2.X.cols() == 61);
}

TEST_CASE("config parsing") {
    std::istringstream in(
        "# sparse identity block\n"
        "setting = 1\n"
        "n = 50   # p follows\n"
        "beta = moderate\n"
        "sigma = toeplitz\n"
        "rho = 0.9\n"
        "methods = stps, zz\n"
        "reps = 7\n"
        "seed = 42\n");
    const auto cfg = parse_sim_config(in);
    CHECK(cfg.n == 50);
    CHECK(cfg.p == 100);
    CHECK(cfg.beta_pattern == BetaPattern::Moderate);
    CHECK(cfg.sigma == SigmaStructure::Toeplitz);
    CHECK(cfg.rho == 0.9);
    CHECK(cfg.reps == 7);
    CHECK(cfg.seed == 42);
    CHECK(cfg.methods == std::vector<Method>{Method::Stps, Method::Zz});

    std::istringstream round(to_config_text(cfg));
    const auto again = parse_sim_config(round);
    CHECK(to_config_text(again) == to_config_text(cfg));

    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(parse_sim_config(unknown), ArgumentError);
    std::istringstream bad_reps("reps = 0\n");
    CHECK_THROWS_AS(parse_sim_config(bad_reps), ArgumentError);
    std::istringstream bad_r2("r2_y = 1.2\n");
    CHECK_THROWS_AS(parse_sim_config(bad_r2), ArgumentError);
    CHECK_THROWS_AS(parse_method("lars"), ArgumentError);
}

TEST_CASE("single oracle replication") {
    SimConfig cfg;
    cfg.reps = 1;
    cfg.methods = {Method::Oracle};
    const auto report = run_simulation(cfg, 1);
    REQUIRE(report.summaries.size() == 1);
    CHECK(report.failures == 0);
    const double cover = report.summaries[0].coverage;
    CHECK((cover == 0.0 || cover == 1.0));
    const auto csv = report_table_csv(report);
    CHECK(csv.rfind("statistic,Oracle\nBias,", 0) == 0);
    int lines = 0;
    for (const char ch : csv) lines += ch == '\n';
    CHECK(lines == 5);
}

TEST_CASE("reports are identical for any worker count") {
    SimConfig cfg;
    cfg.n = 40;
    cfg.p = 80;
    cfg.reps = 6;
    cfg.seed = 9;
    const auto one = run_simulation(cfg, 1);
    const auto many = run_simulation(cfg, 8);
    CHECK(report_table_csv(one) == report_table_csv(many));
    CHECK(estimates_dump_csv(one) == estimates_dump_csv(many));
    CHECK(one.failures == 0);
    for (const auto& s : one.summaries) {
        CHECK(s.coverage >= 0.0);
        CHECK(s.coverage <= 1.0);
        CHECK(s.sd >= 0.0);
    }
    const auto dump = estimates_dump_csv(one);
    int rows = 0;
    for (const char ch : dump) rows += ch == '\n';
    CHECK(rows == 1 + 6 * static_cast<int>(one.methods.size()));
}
