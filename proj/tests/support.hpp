#pragma once

#include "dlasso/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace testing {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    dlasso::RandomStream rng(seed);
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
    return M;
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index size, std::uint64_t seed) {
    return gaussian_matrix(size, 1, seed).col(0);
}

inline Eigen::MatrixXd centered(Eigen::MatrixXd X) {
    X.rowwise() -= X.colwise().mean();
    return X;
}

inline Eigen::VectorXd centered(Eigen::VectorXd y) {
    y.array() -= y.mean();
    return y;
}

// Sparse linear model y = X b + noise on a centered Gaussian design.
struct Instance {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd beta;
};

inline Instance sparse_instance(Eigen::Index n, Eigen::Index p, std::uint64_t seed, int support = 5) {
    Instance out;
    out.X = centered(gaussian_matrix(n, p, seed));
    out.beta = Eigen::VectorXd::Zero(p);
    for (int k = 0; k < support && k < p; ++k) out.beta(k) = (k % 2 == 0 ? 1.0 : -0.7) / (1 + k / 2);
    out.y = centered(Eigen::VectorXd(out.X * out.beta + gaussian_vector(n, seed ^ 0x9e3779b97f4a7c15ULL)));
    return out;
}

// Projected subgradient-free reference: proximal gradient (ISTA) run to a tight
// fixed point, used as an independent solver for small problems.
inline Eigen::VectorXd ista(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                            int iterations = 200000) {
    const double n = static_cast<double>(X.rows());
    const Eigen::MatrixXd G = X.transpose() * X / n;
    const Eigen::VectorXd c = X.transpose() * y / n;
    const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().maxCoeff();
    const double step = 1.0 / L;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd z = b + step * (c - G * b);
        Eigen::VectorXd next(b.size());
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const double t = step * lambda;
            next(j) = z(j) > t ? z(j) - t : (z(j) < -t ? z(j) + t : 0.0);
        }
        const double change = (next - b).lpNorm<Eigen::Infinity>();
        b = next;
        if (change < 1e-15) break;
    }
    return b;
}

}  // namespace testing
