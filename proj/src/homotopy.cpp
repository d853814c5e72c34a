#include "homotopy.hpp"

#include "dlasso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dlasso::detail {

namespace {

// Cholesky factor of G restricted to an ordered active set, grown one column at a time.
class ActiveCholesky {
public:
    explicit ActiveCholesky(const Eigen::MatrixXd& G) : G_(G) {}

    bool add(const std::vector<Eigen::Index>& active, Eigen::Index j) {
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd w(m);
        for (Eigen::Index a = 0; a < m; ++a) w(a) = G_(active[static_cast<std::size_t>(a)], j);
        if (m > 0) L_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(w);
        const double d2 = G_(j, j) - w.squaredNorm();
        if (!(d2 > 1e-12 * G_(j, j))) return false;
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(m + 1, m + 1);
        next.topLeftCorner(m, m) = L_.topLeftCorner(m, m);
        next.row(m).head(m) = w.transpose();
        next(m, m) = std::sqrt(d2);
        L_ = std::move(next);
        return true;
    }

    bool rebuild(const std::vector<Eigen::Index>& active) {
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd Gaa(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                Gaa(a, b) = G_(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
        const Eigen::LLT<Eigen::MatrixXd> llt(Gaa);
        if (llt.info() != Eigen::Success) return false;
        L_ = llt.matrixL();
        return true;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        const auto m = rhs.size();
        Eigen::VectorXd x = rhs;
        L_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(x);
        L_.topLeftCorner(m, m).transpose().triangularView<Eigen::Upper>().solveInPlace(x);
        return x;
    }

private:
    const Eigen::MatrixXd& G_;
    Eigen::MatrixXd L_;
};

}  // namespace

std::vector<Eigen::VectorXd> homotopy_path(const LassoProblem& problem,
                                           const std::vector<double>& targets) {
    const Eigen::MatrixXd& G = problem.gram();
    const Eigen::VectorXd& c = problem.xty();
    const Eigen::Index p = problem.p();

    std::vector<Eigen::VectorXd> out;
    out.reserve(targets.size());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd grad = c;
    double lambda = problem.lambda_max();
    std::size_t next = 0;
    while (next < targets.size() && targets[next] >= lambda) {
        out.push_back(beta);
        ++next;
    }
    if (next == targets.size()) return out;

    std::vector<Eigen::Index> active;
    std::vector<char> is_active(static_cast<std::size_t>(p), 0);
    Eigen::VectorXd sign = Eigen::VectorXd::Zero(p);
    ActiveCholesky chol(G);

    Eigen::Index first = 0;
    grad.cwiseAbs().maxCoeff(&first);
    if (!chol.add(active, first)) throw NumericError("homotopy: zero-variance column");
    active.push_back(first);
    is_active[static_cast<std::size_t>(first)] = 1;
    sign(first) = grad(first) > 0.0 ? 1.0 : -1.0;

    const double eps = 1e-14 * std::max(lambda, 1e-300);
    const long max_steps = 100L * (p + 10);
    Eigen::Index last_dropped = -1;
    for (long step = 0; next < targets.size(); ++step) {
        if (step > max_steps) throw NumericError("homotopy: too many path events");
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd s_active(m);
        for (Eigen::Index a = 0; a < m; ++a) s_active(a) = sign(active[static_cast<std::size_t>(a)]);
        const Eigen::VectorXd dir = chol.solve(s_active);
        Eigen::VectorXd slope = Eigen::VectorXd::Zero(p);
        for (Eigen::Index a = 0; a < m; ++a) slope.noalias() += dir(a) * G.col(active[static_cast<std::size_t>(a)]);

        enum { kTarget, kJoin, kDrop } kind = kTarget;
        double t = lambda - targets[next];
        Eigen::Index who = -1;
        double join_sign = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (is_active[static_cast<std::size_t>(j)] || j == last_dropped) continue;
            if (slope(j) < 1.0) {
                const double tt = (lambda - grad(j)) / (1.0 - slope(j));
                if (tt > eps && tt < t) { t = tt; kind = kJoin; who = j; join_sign = 1.0; }
            }
            if (slope(j) > -1.0) {
                const double tt = (lambda + grad(j)) / (1.0 + slope(j));
                if (tt > eps && tt < t) { t = tt; kind = kJoin; who = j; join_sign = -1.0; }
            }
        }
        for (Eigen::Index a = 0; a < m; ++a) {
            const Eigen::Index j = active[static_cast<std::size_t>(a)];
            if (dir(a) == 0.0) continue;
            const double tt = -beta(j) / dir(a);
            if (tt > eps && tt < t) { t = tt; kind = kDrop; who = j; }
        }

        for (Eigen::Index a = 0; a < m; ++a) beta(active[static_cast<std::size_t>(a)]) += t * dir(a);
        grad.noalias() -= t * slope;
        lambda -= t;

        switch (kind) {
            case kTarget:
                lambda = targets[next];
                grad = c - G * beta;
                out.push_back(beta);
                ++next;
                break;
            case kJoin:
                if (!chol.add(active, who)) throw NumericError("homotopy: active Gram matrix is singular");
                active.push_back(who);
                is_active[static_cast<std::size_t>(who)] = 1;
                sign(who) = join_sign;
                last_dropped = -1;
                break;
            case kDrop: {
                beta(who) = 0.0;
                sign(who) = 0.0;
                is_active[static_cast<std::size_t>(who)] = 0;
                active.erase(std::find(active.begin(), active.end(), who));
                last_dropped = who;
                if (active.empty()) {
                    throw NumericError("homotopy: active set emptied below lambda_max");
                }
                if (!chol.rebuild(active)) throw NumericError("homotopy: active Gram matrix is singular");
                grad = c - G * beta;
                break;
            }
        }
    }
    return out;
}

}  // namespace dlasso::detail
