#include "doctest.h"
#include "support.hpp"

#include "dlasso/dataset.hpp"
#include "dlasso/errors.hpp"

#include <filesystem>
#include <fstream>

using namespace dlasso;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("dlasso_test_" + name);
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("minimal csv") {
    const auto path = write_temp("min.csv", "y,x\n1.5,2\n-0.5,3\n");
    const auto d = load_csv(path, "y", {"x"});
    CHECK(d.n() == 2);
    CHECK(d.p() == 1);
    CHECK(d.y()(0) == 1.5);
    CHECK(d.X()(1, 0) == 3.0);
    CHECK_FALSE(d.centered());
    CHECK(d.column_names() == std::vector<std::string>{"x"});
}

TEST_CASE("csv column order follows the request and quotes are honoured") {
    const auto path = write_temp("order.csv", "\"a\",y,\"b, c\"\n1,10,100\n2,20,201\n4,40,400\n");
    const auto d = load_csv(path, "y", {"b, c", "a"});
    CHECK(d.p() == 2);
    CHECK(d.X()(0, 0) == 100.0);
    CHECK(d.X()(2, 1) == 4.0);
    CHECK(d.column_index("a") == 1);
    CHECK_THROWS_AS(d.column_index("zzz"), DataError);
}

TEST_CASE("csv errors name the problem") {
    const auto nan = write_temp("nan.csv", "y,x\n1,2\n2,NaN\n3,4\n");
    try {
        load_csv(nan, "y", {"x"});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("NaN") != std::string::npos);
        CHECK(msg.find("x") != std::string::npos);
    }
    const auto text = write_temp("text.csv", "y,x\n1,2\n2,abc\n");
    CHECK_THROWS_AS(load_csv(text, "y", {"x"}), DataError);
    const auto missing = write_temp("missing.csv", "y,x\n1,2\n2,3\n");
    CHECK_THROWS_AS(load_csv(missing, "y", {"w"}), DataError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "y", {"x"}), DataError);
    const auto constant = write_temp("const.csv", "y,x,z\n1,2,5\n2,3,5\n3,1,5\n");
    CHECK_THROWS_AS(load_csv(constant, "y", {"x", "z"}), DataError);
}

TEST_CASE("dataset invariants") {
    const Eigen::MatrixXd X = testing::gaussian_matrix(5, 2, 1);
    CHECK_THROWS_AS(Dataset(Eigen::VectorXd::Zero(4), X), DataError);
    CHECK_THROWS_AS(Dataset(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 2)), DataError);
    Eigen::MatrixXd Z = X;
    Z.col(1).setZero();
    CHECK_THROWS_AS(Dataset(Eigen::VectorXd::Ones(5), Z), DataError);
    CHECK_THROWS_AS(Dataset(Eigen::VectorXd::Ones(5), X, std::vector<std::string>{"a"}), DataError);
}

TEST_CASE("interaction expansion") {
    for (int p = 2; p <= 13; ++p) {
        const Dataset d(testing::gaussian_vector(20, 2), testing::gaussian_matrix(20, p, 3 + p));
        CHECK(expand_interactions(d).p() == p + p * (p - 1) / 2);
    }
    Eigen::MatrixXd X = testing::gaussian_matrix(6, 2, 5);
    const auto two = expand_interactions(Dataset(testing::gaussian_vector(6, 6), X, {"u", "v"}));
    CHECK(two.p() == 3);
    CHECK(two.column_names()[2] == "u:v");
    CHECK((two.X().col(2) - X.col(0).cwiseProduct(X.col(1))).norm() == 0.0);

    Eigen::MatrixXd W = testing::gaussian_matrix(8, 4, 7);
    W.col(1).setOnes();
    const auto four = expand_interactions(Dataset(testing::gaussian_vector(8, 8), W));
    REQUIRE(four.p() == 10);
    // Pair order (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
    CHECK((four.X().col(4) - W.col(0)).norm() == 0.0);
    CHECK((four.X().col(7) - W.col(2)).norm() == 0.0);
    CHECK((four.X().col(8) - W.col(3)).norm() == 0.0);
    CHECK(four.column_names()[9] == "x3:x4");
    CHECK_THROWS_AS(expand_interactions(center(two).first), ArgumentError);
}

TEST_CASE("centering") {
    const Eigen::MatrixXd X = testing::gaussian_matrix(10, 3, 9) * 5.0;
    const Eigen::VectorXd y = testing::gaussian_vector(10, 10).array() + 7.0;
    const auto [c, rec] = center(Dataset(y, X));
    CHECK(c.centered());
    CHECK(c.X().colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(c.y().mean()) < 1e-12);
    const auto back = un_center(c, rec);
    CHECK((back.X() - X).cwiseAbs().maxCoeff() <= 1e-12 * X.cwiseAbs().maxCoeff());
    CHECK((back.y() - y).cwiseAbs().maxCoeff() <= 1e-12 * y.cwiseAbs().maxCoeff());
    CHECK_FALSE(back.centered());
    CHECK_THROWS_AS(center(c), ArgumentError);

    const auto [k, krec] = center(Dataset(Eigen::Vector3d(3, 3, 3), Eigen::Vector3d(1, 0, -1)));
    CHECK(k.y().isZero(0.0));
    CHECK(krec.y_mean == 3.0);
    CHECK(krec.x_means(0) == 0.0);
    CHECK(k.X()(0, 0) == 1.0);
}

TEST_CASE("standardize divides by the root mean square") {
    const auto [c, rec] = center(Dataset(testing::gaussian_vector(30, 1), testing::gaussian_matrix(30, 4, 2) * 3.0));
    const auto [s, scale] = standardize(c);
    for (Eigen::Index j = 0; j < 4; ++j) {
        CHECK(s.X().col(j).squaredNorm() / 30.0 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(scale.x_scales(j) == doctest::Approx(std::sqrt(c.X().col(j).squaredNorm() / 30.0)));
    }
    CHECK_THROWS_AS(standardize(Dataset(testing::gaussian_vector(30, 1), testing::gaussian_matrix(30, 4, 2))), ArgumentError);
}
