#include "dlasso/lasso.hpp"

#include "dlasso/errors.hpp"
#include "homotopy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>

namespace dlasso {

void SolverConfig::validate() const {
    if (!(tol > 0.0) || !(kkt_tol > 0.0) || max_sweeps <= 0)
        throw ArgumentError("solver tolerances and sweep cap must be positive");
}

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ArgumentError("lambda grid is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
            throw ArgumentError("lambda grid values must be positive and finite");
        if (i > 0 && !(values_[i] < values_[i - 1]))
            throw ArgumentError("lambda grid must be strictly decreasing");
    }
}

LambdaGrid LambdaGrid::from_unsorted(std::vector<double> values) {
    std::sort(values.begin(), values.end(), std::greater<>());
    if (std::adjacent_find(values.begin(), values.end()) != values.end())
        throw ArgumentError("lambda grid contains duplicate values");
    return LambdaGrid(std::move(values));
}

LassoProblem::LassoProblem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
    : n_(X.rows()) {
    if (y.size() != X.rows()) throw ArgumentError("response length does not match design rows");
    const double n = static_cast<double>(n_);
    gram_.noalias() = X.transpose() * X;
    gram_ /= n;
    xty_.noalias() = X.transpose() * y;
    xty_ /= n;
    yy_ = y.squaredNorm() / n;
}

LassoProblem::LassoProblem(Eigen::MatrixXd gram, Eigen::VectorXd xty, double yy, Eigen::Index n)
    : gram_(std::move(gram)), xty_(std::move(xty)), yy_(yy), n_(n) {
    if (gram_.rows() != gram_.cols() || gram_.rows() != xty_.size())
        throw ArgumentError("gram matrix and cross-product vector disagree in shape");
}

double LassoProblem::lambda_max() const {
    return xty_.size() == 0 ? 0.0 : xty_.lpNorm<Eigen::Infinity>();
}

double LassoProblem::objective(const Eigen::VectorXd& beta, double lambda) const {
    const double rss = yy_ - 2.0 * xty_.dot(beta) + beta.dot(gram_ * beta);
    return std::max(rss, 0.0) + 2.0 * lambda * beta.lpNorm<1>();
}

Eigen::VectorXd LassoProblem::gradient(const Eigen::VectorXd& beta) const {
    return xty_ - gram_ * beta;
}

namespace {

double kkt_from_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& beta,
                         double lambda) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double v = beta(j) != 0.0
                             ? std::abs(grad(j) - (beta(j) > 0.0 ? lambda : -lambda))
                             : std::max(0.0, std::abs(grad(j)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

class CoordinateDescent {
public:
    CoordinateDescent(const LassoProblem& prob, double lambda, Eigen::VectorXd beta)
        : prob_(prob), G_(prob.gram()), lambda_(lambda), beta_(std::move(beta)),
          grad_(prob.gradient(beta_)) {}

    // Cyclic pass over `coords`; returns the largest absolute coefficient change.
    template <class Coords>
    double sweep(const Coords& coords) {
        double biggest = 0.0;
        for (const Eigen::Index j : coords) {
            const double gjj = G_(j, j);
            const double next = gjj > 0.0 ? soft_threshold(grad_(j) + gjj * beta_(j), lambda_) / gjj
                                          : 0.0;
            const double delta = next - beta_(j);
            if (delta != 0.0) {
                beta_(j) = next;
                grad_.noalias() -= delta * G_.col(j);
                biggest = std::max(biggest, std::abs(delta));
            }
        }
        return biggest;
    }

    std::vector<Eigen::Index> active_set() const {
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < beta_.size(); ++j)
            if (beta_(j) != 0.0) active.push_back(j);
        return active;
    }

    // Solves the stationarity equations on the current active set with signs held
    // fixed. The candidate replaces the iterate only if it keeps every sign and
    // leaves all inactive coordinates feasible, so it is an exact solution up to
    // rounding.
    bool polish(const std::vector<Eigen::Index>& active, double slack) {
        if (active.empty()) return false;
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd Gaa(m, m);
        Eigen::VectorXd rhs(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const Eigen::Index j = active[static_cast<std::size_t>(a)];
            rhs(a) = prob_.xty()(j) - (beta_(j) > 0.0 ? lambda_ : -lambda_);
            for (Eigen::Index b = 0; b < m; ++b) Gaa(a, b) = G_(j, active[static_cast<std::size_t>(b)]);
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(Gaa);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        const Eigen::VectorXd sol = ldlt.solve(rhs);
        if (!sol.allFinite()) return false;

        Eigen::VectorXd candidate = Eigen::VectorXd::Zero(beta_.size());
        for (Eigen::Index a = 0; a < m; ++a) {
            const Eigen::Index j = active[static_cast<std::size_t>(a)];
            if (sol(a) * beta_(j) <= 0.0) return false;
            candidate(j) = sol(a);
        }
        Eigen::VectorXd grad = prob_.gradient(candidate);
        if (kkt_from_gradient(grad, candidate, lambda_) > slack) return false;
        beta_ = std::move(candidate);
        grad_ = std::move(grad);
        return true;
    }

    void refresh_gradient() { grad_ = prob_.gradient(beta_); }
    double kkt() const { return kkt_from_gradient(grad_, beta_, lambda_); }
    double objective() const { return prob_.objective(beta_, lambda_); }
    Eigen::VectorXd& beta() { return beta_; }

private:
    const LassoProblem& prob_;
    const Eigen::MatrixXd& G_;
    double lambda_;
    Eigen::VectorXd beta_;
    Eigen::VectorXd grad_;
};

struct IndexRange {
    Eigen::Index count;
    struct iterator {
        Eigen::Index i;
        Eigen::Index operator*() const { return i; }
        iterator& operator++() { ++i; return *this; }
        bool operator!=(const iterator& o) const { return i != o.i; }
    };
    iterator begin() const { return {0}; }
    iterator end() const { return {count}; }
};

}  // namespace

double LassoProblem::kkt_violation(const Eigen::VectorXd& beta, double lambda) const {
    return kkt_from_gradient(gradient(beta), beta, lambda);
}

namespace {

constexpr int kStallSweeps = 200;

LassoFit descend(const LassoProblem& problem, double lambda, const SolverConfig& cfg,
                 const Eigen::VectorXd& start, int budget) {
    CoordinateDescent cd(problem, lambda, start);
    const IndexRange all{problem.p()};
    const double polish_slack = 0.01 * cfg.kkt_tol;

    LassoFit out;
    out.lambda = lambda;
    int sweeps = 0;
#ifndef NDEBUG
    double last_objective = cd.objective();
    const auto check_descent = [&] {
        const double now = cd.objective();
        assert(now <= last_objective + 1e-10 * std::max(1.0, std::abs(last_objective)));
        last_objective = now;
    };
#else
    const auto check_descent = [] {};
#endif

    while (sweeps < budget) {
        const double change = cd.sweep(all);
        ++sweeps;
        check_descent();
        if (change < cfg.tol) {
            cd.refresh_gradient();
            if (cd.kkt() <= cfg.kkt_tol) {
                out.converged = true;
                break;
            }
            continue;
        }
        const auto active = cd.active_set();
        int inner = 0;
        while (sweeps < budget) {
            const double inner_change = cd.sweep(active);
            ++sweeps;
            ++inner;
            check_descent();
            if (inner_change < cfg.tol) break;
            if (inner % 10 == 0 && cd.polish(active, polish_slack)) {
#ifndef NDEBUG
                last_objective = cd.objective();
#endif
                break;
            }
        }
    }
    out.beta = std::move(cd.beta());
    out.iterations = sweeps;
    return out;
}

void finish(const LassoProblem& problem, LassoFit& out, const SolverConfig& cfg) {
    out.objective = problem.objective(out.beta, out.lambda);
    out.kkt = problem.kkt_violation(out.beta, out.lambda);
    if (!out.converged)
        out.diagnostic = "coordinate descent hit max_sweeps=" + std::to_string(cfg.max_sweeps) +
                         " at lambda=" + std::to_string(out.lambda) +
                         " with KKT violation " + std::to_string(out.kkt);
}

// Continues descent from `start` with what is left of the sweep budget.
LassoFit resume(const LassoProblem& problem, double lambda, const SolverConfig& cfg,
                const Eigen::VectorXd& start, int used) {
    LassoFit out = descend(problem, lambda, cfg, start, std::max(0, cfg.max_sweeps - used));
    out.iterations += used;
    return out;
}

}  // namespace

LassoFit LassoProblem::fit(double lambda, const SolverConfig& cfg,
                           const Eigen::VectorXd* warm) const {
    cfg.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ArgumentError("lambda must be a nonnegative finite number");
    if (warm && warm->size() != p()) throw ArgumentError("warm start has wrong length");

    const Eigen::VectorXd start = warm ? *warm : Eigen::VectorXd::Zero(p());
    LassoFit out = descend(*this, lambda, cfg, start, std::min(cfg.max_sweeps, kStallSweeps));
    if (!out.converged && cfg.max_sweeps > kStallSweeps) {
        // Slow coordinate descent: restart from the exact path solution.
        bool done = false;
        try {
            const auto exact = detail::homotopy_path(*this, {lambda});
            LassoFit polished = resume(*this, lambda, cfg, exact.front(), out.iterations);
            if (polished.converged) {
                out = std::move(polished);
                done = true;
            }
        } catch (const NumericError&) {
        }
        if (!done) out = resume(*this, lambda, cfg, out.beta, out.iterations);
    }
    finish(*this, out, cfg);
    return out;
}

double kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double lambda) {
    if (X.cols() != beta.size() || X.rows() != y.size())
        throw ArgumentError("kkt_violation: shapes disagree");
    const Eigen::VectorXd residual = y - X * beta;
    const Eigen::VectorXd grad = X.transpose() * residual / static_cast<double>(X.rows());
    return kkt_from_gradient(grad, beta, lambda);
}

double kkt_violation(const Dataset& d, const LassoFit& fit) {
    return kkt_violation(d.X(), d.y(), fit.beta, fit.lambda);
}

LassoFit fit_lasso(const Dataset& d, double lambda, const SolverConfig& cfg,
                   const std::optional<Eigen::VectorXd>& warm) {
    if (!d.centered()) throw ArgumentError("fit_lasso expects a centered dataset");
    if (lambda < 0.0) throw ArgumentError("lambda must be nonnegative");
    const LassoProblem problem(d.X(), d.y());
    LassoFit fit = problem.fit(lambda, cfg, warm ? &*warm : nullptr);
    const Eigen::VectorXd residual = d.y() - d.X() * fit.beta;
    fit.objective = residual.squaredNorm() / static_cast<double>(d.n()) +
                    2.0 * lambda * fit.beta.lpNorm<1>();
    fit.kkt = kkt_violation(d, fit);
    return fit;
}

LambdaGrid lambda_path(double lambda_max, int count, double ratio) {
    if (count < 2) throw ArgumentError("lambda path needs at least 2 values");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("lambda path ratio must lie in (0,1)");
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
        throw NumericError("lambda_max is zero: response is orthogonal to every covariate");
    std::vector<double> values(static_cast<std::size_t>(count));
    const double step = std::log(ratio) / (count - 1);
    for (int k = 0; k < count; ++k) values[static_cast<std::size_t>(k)] = lambda_max * std::exp(step * k);
    values.front() = lambda_max;
    return LambdaGrid(std::move(values));
}

LambdaGrid lambda_path(const Dataset& d, int count, double ratio) {
    if (!d.centered()) throw ArgumentError("lambda_path expects a centered dataset");
    const double lmax =
        (d.X().transpose() * d.y()).lpNorm<Eigen::Infinity>() / static_cast<double>(d.n());
    return lambda_path(lmax, count, ratio);
}

std::vector<LassoFit> fit_path(const LassoProblem& problem, const LambdaGrid& grid,
                               const SolverConfig& cfg) {
    cfg.validate();
    const auto& lambdas = grid.values();
    std::vector<LassoFit> fits;
    fits.reserve(lambdas.size());
    std::vector<Eigen::VectorXd> exact;
    std::size_t exact_from = 0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double lambda = lambdas[k];
        const Eigen::VectorXd start =
            fits.empty() ? Eigen::VectorXd::Zero(problem.p()) : fits.back().beta;
        LassoFit fit;
        if (exact.empty()) {
            fit = descend(problem, lambda, cfg, start, std::min(cfg.max_sweeps, kStallSweeps));
            if (!fit.converged && cfg.max_sweeps > kStallSweeps) {
                // Follow the exact path for the rest of the grid.
                try {
                    exact = detail::homotopy_path(
                        problem, std::vector<double>(lambdas.begin() + static_cast<std::ptrdiff_t>(k),
                                                     lambdas.end()));
                    exact_from = k;
                } catch (const NumericError&) {
                }
                const Eigen::VectorXd& from = exact.empty() ? fit.beta : exact.front();
                fit = resume(problem, lambda, cfg, from, fit.iterations);
            }
        } else {
            fit = resume(problem, lambda, cfg, exact[k - exact_from], 0);
        }
        finish(problem, fit, cfg);
        fits.push_back(std::move(fit));
    }
    return fits;
}

std::vector<LassoFit> fit_path(const Dataset& d, const LambdaGrid& grid, const SolverConfig& cfg) {
    if (!d.centered()) throw ArgumentError("fit_path expects a centered dataset");
    const LassoProblem problem(d.X(), d.y());
    auto fits = fit_path(problem, grid, cfg);
    for (auto& fit : fits) {
        const Eigen::VectorXd residual = d.y() - d.X() * fit.beta;
        fit.objective = residual.squaredNorm() / static_cast<double>(d.n()) +
                        2.0 * fit.lambda * fit.beta.lpNorm<1>();
        fit.kkt = kkt_violation(d, fit);
    }
    return fits;
}

}  // namespace dlasso
