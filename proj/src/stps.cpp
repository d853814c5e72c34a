#include "dlasso/stps.hpp"

#include "dlasso/cv.hpp"
#include "dlasso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dlasso {

std::string to_string(Branch b) {
    return b == Branch::AllAbove ? "all_above" : "constrained";
}

CandidateGrid CandidateGrid::from_values(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("candidate grid is empty");
    for (const double v : values)
        if (!(v > 0.0) || !std::isfinite(v))
            throw ArgumentError("candidate values must be positive and finite");
    std::sort(values.begin(), values.end());
    std::vector<double> unique;
    for (const double v : values)
        if (unique.empty() || v > unique.back() * (1.0 + 1e-12)) unique.push_back(v);
    CandidateGrid grid;
    grid.lambda_min = unique.front();
    grid.lambda_max = unique.back();
    grid.values = std::move(unique);
    return grid;
}

LambdaGrid CandidateGrid::descending() const {
    return LambdaGrid(std::vector<double>(values.rbegin(), values.rend()));
}

CandidateGrid build_candidate_grid(const Eigen::MatrixXd& X, Eigen::Index j, double kappa,
                                   int path_size, double path_ratio, int small_count) {
    if (!(kappa > 0.0)) throw ArgumentError("kappa must be positive");
    if (path_size < 1) throw ArgumentError("path size must be at least 1");
    if (small_count < 1) throw ArgumentError("small-value count must be at least 1");
    if (j < 0 || j >= X.cols()) throw ArgumentError("target column out of range");

    const double n = static_cast<double>(X.rows());
    double lmax = 0.0;
    for (Eigen::Index k = 0; k < X.cols(); ++k)
        if (k != j) lmax = std::max(lmax, std::abs(X.col(k).dot(X.col(j))) / n);
    if (!(lmax > 0.0))
        throw NumericError("target column is orthogonal to every other column (lambda_max = 0)");

    if (path_ratio <= 0.0) path_ratio = X.rows() < X.cols() - 1 ? 0.01 : 1e-4;

    std::vector<double> values;
    const double unit = kappa / std::sqrt(n);
    for (int k = 1; k <= small_count; ++k) values.push_back(unit * k);
    if (path_size == 1) {
        values.push_back(lmax);
    } else {
        const auto path = lambda_path(lmax, path_size, path_ratio);
        values.insert(values.end(), path.values().begin(), path.values().end());
    }
    CandidateGrid grid = CandidateGrid::from_values(std::move(values));
    grid.lambda_min = unit;
    grid.lambda_max = lmax;
    return grid;
}

StpsResult select_from_trace(TuneTrace trace, double eta) {
    const auto& pts = trace.points;
    if (pts.empty()) throw ArgumentError("cannot select from an empty trace");

    StpsResult out;
    out.eta_star = eta;

    // Ascending scan with `<=` keeps the largest lambda among ties.
    std::optional<std::size_t> star;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].f_value <= eta)) continue;
        if (!star || pts[i].omega_value <= pts[*star].omega_value) star = i;
    }

    if (!star) {
        out.branch = Branch::AllAbove;
        out.selected = 0;
    } else {
        out.branch = Branch::Constrained;
        out.lambda_star = pts[*star].lambda;
        const double cap = kVarianceInflation * std::sqrt(pts[*star].omega_value);
        out.omega_star_half = cap;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!(std::sqrt(pts[i].omega_value) <= cap)) continue;
            if (!pick || pts[i].f_value <= pts[*pick].f_value) pick = i;
        }
        out.selected = *pick;  // star itself always satisfies the cap
    }
    out.lambda1 = pts[out.selected].lambda;
    out.trace = std::move(trace);
    return out;
}

namespace {

TuneTrace trace_from_fits(const std::vector<NodewiseFit>& fits, const Eigen::MatrixXd& X) {
    TuneTrace trace;
    trace.points.reserve(fits.size());
    for (const auto& fit : fits) trace.points.push_back(trace_point(fit, X));
    return trace;
}

}  // namespace

std::pair<double, double> eta_star(const Eigen::MatrixXd& X, Eigen::Index j,
                                   const CandidateGrid& grid, int k_folds, std::uint64_t seed,
                                   const SolverConfig& cfg) {
    const NodewiseProblem problem(X, j);
    const auto cv = kfold_cv(problem.others(), X.col(j), grid.descending(), k_folds, seed, cfg);
    const auto refit = problem.fit(cv.lambda_min, cfg);
    return {std::sqrt(refit.tau_tilde_sq / static_cast<double>(X.rows())), cv.lambda_min};
}

StpsResult select_stps(const Eigen::MatrixXd& X, Eigen::Index j, const CandidateGrid& grid,
                       int k_folds, std::uint64_t seed, const SolverConfig& cfg) {
    const NodewiseProblem problem(X, j);
    const auto fits = problem.fit_grid(grid.descending(), cfg);
    const auto cv = kfold_cv(problem.others(), X.col(j), grid.descending(), k_folds, seed, cfg);
    const auto at_cv = std::find_if(fits.begin(), fits.end(),
                                    [&](const NodewiseFit& f) { return f.lambda == cv.lambda_min; });
    const double tau_cv = at_cv->tau_tilde_sq;
    auto result = select_from_trace(trace_from_fits(fits, X),
                                    std::sqrt(tau_cv / static_cast<double>(X.rows())));
    result.cv_lambda = cv.lambda_min;
    return result;
}

double zz_threshold(Eigen::Index n, Eigen::Index p) {
    return std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

StpsResult select_zz(const Eigen::MatrixXd& X, Eigen::Index j, const CandidateGrid& grid,
                     const SolverConfig& cfg) {
    const NodewiseProblem problem(X, j);
    const auto fits = problem.fit_grid(grid.descending(), cfg);
    return select_from_trace(trace_from_fits(fits, X), zz_threshold(X.rows(), X.cols()));
}

double select_cv_nodewise(const Eigen::MatrixXd& X, Eigen::Index j, const CandidateGrid& grid,
                          int k_folds, std::uint64_t seed, const SolverConfig& cfg) {
    const NodewiseProblem problem(X, j);
    return kfold_cv(problem.others(), X.col(j), grid.descending(), k_folds, seed, cfg).lambda_min;
}

double universal_lambda(double tau1, Eigen::Index n, Eigen::Index p) {
    if (!(tau1 > 0.0)) throw ArgumentError("tau1 must be positive");
    if (n < 1 || p < 1) throw ArgumentError("n and p must be positive");
    return tau1 * zz_threshold(n, p);
}

}  // namespace dlasso
