#include "dlasso/simulation.hpp"

#include "dlasso/cv.hpp"
#include "dlasso/dataset.hpp"
#include "dlasso/errors.hpp"
#include "dlasso/inference.hpp"
#include "dlasso/nodewise.hpp"
#include "dlasso/stps.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace dlasso {

namespace {

// Sub-stream keys inside one replication.
enum Stream : std::uint64_t {
    kDesignStream = 1,
    kNoiseStream = 2,
    kStructuralNoiseStream = 3,
    kLassoCvStream = 4,
    kNodewiseCvStream = 5,
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream is(value);
    T out{};
    is >> out;
    if (is.fail() || !is.eof()) throw ArgumentError("config key '" + key + "': bad value '" + value + "'");
    return out;
}

}  // namespace

std::string to_string(BetaPattern v) {
    switch (v) {
        case BetaPattern::Sparse: return "sparse";
        case BetaPattern::Moderate: return "moderate";
        default: return "dense";
    }
}

std::string to_string(GammaPattern v) { return v == GammaPattern::Sparse ? "sparse" : "dense"; }

std::string to_string(SigmaStructure v) {
    switch (v) {
        case SigmaStructure::Identity: return "identity";
        case SigmaStructure::Toeplitz: return "toeplitz";
        default: return "equicorr";
    }
}

std::string to_string(Method v) {
    switch (v) {
        case Method::Oracle: return "Oracle";
        case Method::Stps: return "STPS";
        case Method::Cv: return "CV";
        case Method::Univ: return "Univ";
        default: return "ZZ";
    }
}

Method parse_method(const std::string& text) {
    const auto t = lower(trim(text));
    if (t == "oracle") return Method::Oracle;
    if (t == "stps") return Method::Stps;
    if (t == "cv") return Method::Cv;
    if (t == "univ") return Method::Univ;
    if (t == "zz") return Method::Zz;
    throw ArgumentError("unknown method '" + text + "'");
}

void SimConfig::validate() const {
    if (n < 4) throw ArgumentError("n must be at least 4");
    if (p < 1) throw ArgumentError("p must be positive");
    if (!(r2_y > 0.0 && r2_y < 1.0)) throw ArgumentError("r2_y must lie in (0,1)");
    if (!(r2_x > 0.0 && r2_x < 1.0)) throw ArgumentError("r2_x must lie in (0,1)");
    if (reps < 1) throw ArgumentError("reps must be at least 1");
    if (methods.empty()) throw ArgumentError("at least one method is required");
    if (folds < 2 || folds > n / 2) throw ArgumentError("folds must lie in [2, n/2]");
    if (!(kappa > 0.0)) throw ArgumentError("kappa must be positive");
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("level must lie in (0,1)");
    if (path_size < 2) throw ArgumentError("path_size must be at least 2");
    if (beta_pattern == BetaPattern::Moderate && p + 1 < 21)
        throw ArgumentError("moderately sparse beta0 needs p >= 20");
    if (setting == Setting::Two && gamma_pattern == GammaPattern::Sparse && p < 8)
        throw ArgumentError("sparse gamma0 needs p >= 8");
    solver.validate();
}

SimConfig parse_sim_config(std::istream& in) {
    SimConfig cfg;
    bool p_given = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("config line " + std::to_string(line_no) + " has no '='");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        const std::string v = lower(value);

        if (key == "setting") {
            if (v == "1" || v == "one") cfg.setting = Setting::One;
            else if (v == "2" || v == "two") cfg.setting = Setting::Two;
            else throw ArgumentError("setting must be 1 or 2");
        } else if (key == "n") {
            cfg.n = parse_number<int>(key, value);
        } else if (key == "p") {
            cfg.p = parse_number<int>(key, value);
            p_given = true;
        } else if (key == "beta" || key == "beta_pattern") {
            if (v == "sparse") cfg.beta_pattern = BetaPattern::Sparse;
            else if (v == "moderate" || v == "moderately_sparse") cfg.beta_pattern = BetaPattern::Moderate;
            else if (v == "dense") cfg.beta_pattern = BetaPattern::Dense;
            else throw ArgumentError("unknown beta pattern '" + value + "'");
        } else if (key == "gamma" || key == "gamma_pattern") {
            if (v == "sparse") cfg.gamma_pattern = GammaPattern::Sparse;
            else if (v == "dense") cfg.gamma_pattern = GammaPattern::Dense;
            else throw ArgumentError("unknown gamma pattern '" + value + "'");
        } else if (key == "sigma" || key == "sigma_structure") {
            if (v == "identity") cfg.sigma = SigmaStructure::Identity;
            else if (v == "toeplitz") cfg.sigma = SigmaStructure::Toeplitz;
            else if (v == "equicorr") cfg.sigma = SigmaStructure::Equicorr;
            else throw ArgumentError("unknown sigma structure '" + value + "'");
        } else if (key == "rho") {
            cfg.rho = parse_number<double>(key, value);
        } else if (key == "r2_y") {
            cfg.r2_y = parse_number<double>(key, value);
        } else if (key == "r2_x") {
            cfg.r2_x = parse_number<double>(key, value);
        } else if (key == "reps") {
            cfg.reps = parse_number<int>(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "methods") {
            cfg.methods.clear();
            std::istringstream is(value);
            std::string item;
            while (std::getline(is, item, ',')) cfg.methods.push_back(parse_method(item));
        } else if (key == "folds") {
            cfg.folds = parse_number<int>(key, value);
        } else if (key == "kappa") {
            cfg.kappa = parse_number<double>(key, value);
        } else if (key == "level") {
            cfg.level = parse_number<double>(key, value);
        } else if (key == "path_size") {
            cfg.path_size = parse_number<int>(key, value);
        } else if (key == "tol") {
            cfg.solver.tol = parse_number<double>(key, value);
        } else if (key == "kkt_tol") {
            cfg.solver.kkt_tol = parse_number<double>(key, value);
        } else if (key == "max_sweeps") {
            cfg.solver.max_sweeps = parse_number<int>(key, value);
        } else {
            throw ArgumentError("unknown config key '" + key + "'");
        }
    }
    if (!p_given) cfg.p = 2 * cfg.n;
    cfg.validate();
    return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config file " + path.string());
    return parse_sim_config(in);
}

std::string to_config_text(const SimConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "setting = " << (cfg.setting == Setting::One ? 1 : 2) << '\n'
       << "n = " << cfg.n << '\n'
       << "p = " << cfg.p << '\n'
       << "beta = " << to_string(cfg.beta_pattern) << '\n'
       << "gamma = " << to_string(cfg.gamma_pattern) << '\n'
       << "sigma = " << to_string(cfg.sigma) << '\n'
       << "rho = " << cfg.rho << '\n'
       << "r2_y = " << cfg.r2_y << '\n'
       << "r2_x = " << cfg.r2_x << '\n'
       << "reps = " << cfg.reps << '\n'
       << "seed = " << cfg.seed << '\n'
       << "methods = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
        os << (i ? "," : "") << lower(to_string(cfg.methods[i]));
    os << '\n'
       << "folds = " << cfg.folds << '\n'
       << "kappa = " << cfg.kappa << '\n'
       << "level = " << cfg.level << '\n'
       << "path_size = " << cfg.path_size << '\n'
       << "tol = " << cfg.solver.tol << '\n'
       << "kkt_tol = " << cfg.solver.kkt_tol << '\n'
       << "max_sweeps = " << cfg.solver.max_sweeps << '\n';
    return os.str();
}

Eigen::MatrixXd build_sigma(SigmaStructure structure, double rho, Eigen::Index dim) {
    if (dim < 1) throw ArgumentError("covariance dimension must be positive");
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(dim, dim);
    switch (structure) {
        case SigmaStructure::Identity:
            break;
        case SigmaStructure::Toeplitz:
            if (!(rho > -1.0 && rho < 1.0)) throw ArgumentError("Toeplitz rho must lie in (-1,1)");
            for (Eigen::Index j = 0; j < dim; ++j)
                for (Eigen::Index k = 0; k < dim; ++k)
                    S(j, k) = std::pow(rho, static_cast<double>(std::abs(j - k)));
            break;
        case SigmaStructure::Equicorr:
            if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("equicorrelation rho must lie in (0,1)");
            S.setConstant(rho);
            S.diagonal().setOnes();
            break;
    }
    return S;
}

Eigen::VectorXd beta_pattern_vector(BetaPattern pattern, Eigen::Index dim) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    switch (pattern) {
        case BetaPattern::Sparse:
            if (dim < 6) throw ArgumentError("sparse beta0 needs dimension >= 6");
            v.segment(1, 5).setOnes();
            break;
        case BetaPattern::Moderate:
            if (dim < 21) throw ArgumentError("moderately sparse beta0 needs dimension >= 21");
            v.segment(1, 10).setConstant(5.0);
            v.segment(11, 10).setOnes();
            break;
        case BetaPattern::Dense:
            for (Eigen::Index k = 1; k < dim; ++k) v(k) = 1.0 / std::sqrt(static_cast<double>(k));
            break;
    }
    return v;
}

Eigen::VectorXd build_beta(BetaPattern pattern, Eigen::Index dim, double c_y) {
    Eigen::VectorXd b = c_y * beta_pattern_vector(pattern, dim);
    b(0) = kTargetCoefficient;
    return b;
}

Eigen::VectorXd gamma_pattern_vector(GammaPattern pattern, Eigen::Index dim) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    if (pattern == GammaPattern::Sparse) {
        if (dim < 8) throw ArgumentError("sparse gamma0 needs dimension >= 8");
        v.segment(4, 4).setOnes();
    } else {
        for (Eigen::Index k = 0; k < dim; ++k) v(k) = 1.0 / std::sqrt(static_cast<double>(k + 1));
    }
    return v;
}

Eigen::VectorXd build_gamma(GammaPattern pattern, Eigen::Index dim, double c_x) {
    return c_x * gamma_pattern_vector(pattern, dim);
}

double calibrate_cy(BetaPattern pattern, const Eigen::MatrixXd& Sigma, double r2_y,
                    double noise_var) {
    if (!(r2_y > 0.0 && r2_y < 1.0)) throw ArgumentError("r2_y must lie in (0,1)");
    if (!(noise_var > 0.0)) throw ArgumentError("noise variance must be positive");
    const Eigen::VectorXd v = beta_pattern_vector(pattern, Sigma.rows());
    const Eigen::VectorXd Sv = Sigma * v;
    const double target = r2_y * noise_var / (1.0 - r2_y);
    const double a = v.dot(Sv);
    const double b = 2.0 * kTargetCoefficient * Sv(0);
    const double c = kTargetCoefficient * kTargetCoefficient * Sigma(0, 0) - target;
    if (!(a > 0.0)) throw NumericError("coefficient pattern carries no signal");
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw NumericError("signal target is unreachable for this pattern");
    const double root = (-b + std::sqrt(disc)) / (2.0 * a);
    if (root < -1e-12)
        throw NumericError("target R^2 is below the fixed coefficient's contribution");
    return std::max(root, 0.0);
}

double calibrate_cx(GammaPattern pattern, const Eigen::MatrixXd& Sigma, double r2_x) {
    if (!(r2_x >= 0.0 && r2_x < 1.0)) throw ArgumentError("r2_x must lie in [0,1)");
    const Eigen::VectorXd v = gamma_pattern_vector(pattern, Sigma.rows());
    const double q = v.dot(Sigma * v);
    if (!(q > 0.0)) throw NumericError("gamma pattern carries no signal");
    return std::sqrt(r2_x / ((1.0 - r2_x) * q));
}

double population_tau1_sq(const Eigen::MatrixXd& Sigma) {
    const Eigen::Index d = Sigma.rows();
    if (d < 1 || Sigma.cols() != d) throw ArgumentError("covariance must be square");
    if (d == 1) return Sigma(0, 0);
    const Eigen::MatrixXd rest = Sigma.bottomRightCorner(d - 1, d - 1);
    const Eigen::VectorXd cross = Sigma.col(0).tail(d - 1);
    const Eigen::LLT<Eigen::MatrixXd> llt(rest);
    if (llt.info() != Eigen::Success) throw NumericError("covariance submatrix is singular");
    return Sigma(0, 0) - cross.dot(llt.solve(cross));
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& Sigma) {
    const Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
    return llt.matrixL();
}

Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& factor, Eigen::Index n, RandomStream& rng) {
    const Eigen::Index d = factor.rows();
    Eigen::MatrixXd Z(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < d; ++k) Z(i, k) = rng.normal();
    return Z * factor.transpose();
}

double phi_max_1(const Eigen::MatrixXd& X) {
    if (X.size() == 0) throw ArgumentError("phi_max_1 needs a nonempty matrix");
    return X.colwise().squaredNorm().maxCoeff() / static_cast<double>(X.rows());
}

SimDesign build_design(const SimConfig& cfg) {
    cfg.validate();
    SimDesign design;
    const Eigen::Index p = cfg.p;
    if (cfg.setting == Setting::One) {
        const Eigen::MatrixXd Sigma = build_sigma(cfg.sigma, cfg.rho, p + 1);
        design.identity = cfg.sigma == SigmaStructure::Identity;
        design.factor = design.identity ? Eigen::MatrixXd::Identity(p + 1, p + 1) : cholesky_factor(Sigma);
        design.c_y = calibrate_cy(cfg.beta_pattern, Sigma, cfg.r2_y);
        design.beta0 = build_beta(cfg.beta_pattern, p + 1, design.c_y);
        design.tau1_sq = population_tau1_sq(Sigma);
    } else {
        // Setting 2: X_{-1} ~ N(0, I), X_1 = 0.5 + X_{-1}'gamma0 + eta.
        design.identity = true;
        design.factor = Eigen::MatrixXd::Identity(p, p);
        design.c_x = calibrate_cx(cfg.gamma_pattern, Eigen::MatrixXd::Identity(p, p), cfg.r2_x);
        design.gamma0 = build_gamma(cfg.gamma_pattern, p, design.c_x);
        // c_y uses the nominal identity covariance, not the joint law of (X_1, X_{-1}).
        design.c_y = calibrate_cy(cfg.beta_pattern, Eigen::MatrixXd::Identity(p + 1, p + 1), cfg.r2_y);
        design.beta0 = build_beta(cfg.beta_pattern, p + 1, design.c_y);
        design.tau1_sq = 1.0;
    }
    return design;
}

SimDraw draw_data(const SimConfig& cfg, const SimDesign& design, std::uint64_t rep_seed) {
    const Eigen::Index n = cfg.n;
    const Eigen::Index p = cfg.p;
    RandomStream x_rng(derive_seed(rep_seed, kDesignStream));
    RandomStream e_rng(derive_seed(rep_seed, kNoiseStream));

    SimDraw draw;
    draw.beta0 = design.beta0;
    draw.eps.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) draw.eps(i) = e_rng.normal();

    if (cfg.setting == Setting::One) {
        if (design.identity) {
            draw.X.resize(n, p + 1);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index k = 0; k <= p; ++k) draw.X(i, k) = x_rng.normal();
        } else {
            draw.X = sample_mvn(design.factor, n, x_rng);
        }
    } else {
        RandomStream h_rng(derive_seed(rep_seed, kStructuralNoiseStream));
        draw.X.resize(n, p + 1);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index k = 1; k <= p; ++k) draw.X(i, k) = x_rng.normal();
        for (Eigen::Index i = 0; i < n; ++i)
            draw.X(i, 0) = 0.5 + draw.X.row(i).tail(p).dot(design.gamma0) + h_rng.normal();
    }
    draw.y = (draw.X * design.beta0).array() + 1.0;
    draw.y += draw.eps;
    return draw;
}

namespace {

MethodEstimate from_inference(Method m, const InferenceResult& r) {
    return {m, r.b1, r.std_error, r.ci_lower, r.ci_upper, r.lambda1};
}

// Least squares on the true support (target included) with df-corrected noise variance.
MethodEstimate oracle_estimate(const Dataset& d, const Eigen::VectorXd& beta0, double level) {
    std::vector<Eigen::Index> support{0};
    for (Eigen::Index k = 1; k < beta0.size(); ++k)
        if (beta0(k) != 0.0) support.push_back(k);
    const Eigen::MatrixXd Xs = d.X()(Eigen::all, support);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    if (qr.rank() < Xs.cols()) throw NumericError("oracle design is rank deficient");
    const Eigen::VectorXd coef = qr.solve(d.y());
    const double dof = static_cast<double>(d.n() - Xs.cols() - 1);
    if (dof <= 0) throw NumericError("oracle regression has no residual degrees of freedom");
    const double s2 = (d.y() - Xs * coef).squaredNorm() / dof;
    const Eigen::MatrixXd gram_inv =
        (Xs.transpose() * Xs).ldlt().solve(Eigen::MatrixXd::Identity(Xs.cols(), Xs.cols()));
    const double se = std::sqrt(s2 * gram_inv(0, 0));
    const double z = normal_quantile(0.5 + level / 2.0);
    return {Method::Oracle, coef(0), se, coef(0) - z * se, coef(0) + z * se, 0.0};
}

bool wants(const SimConfig& cfg, Method m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

}  // namespace

ReplicationResult run_replication(const SimConfig& cfg, const SimDesign& design, int index) {
    ReplicationResult out;
    out.index = index;
    out.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
    try {
        const SimDraw draw = draw_data(cfg, design, out.seed);
        const auto [data, record] = center(Dataset(draw.y, draw.X));
        const Eigen::Index n = data.n();
        const Eigen::Index dim = data.p();

        for (const Method m : cfg.methods) {
            if (m == Method::Oracle && cfg.beta_pattern != BetaPattern::Dense)
                out.estimates.push_back(oracle_estimate(data, draw.beta0, cfg.level));
        }
        const bool debiased = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                          [](Method m) { return m != Method::Oracle; });
        if (debiased) {
            // Lasso: lambda0 by CV minimum, noise scale by the one-SE refit.
            const double ratio = n < dim ? 0.01 : 1e-4;
            const LambdaGrid grid0 = lambda_path(data, cfg.path_size, ratio);
            const auto cv0 = kfold_cv(data, grid0, cfg.folds, derive_seed(out.seed, kLassoCvStream),
                                      cfg.solver);
            const LassoProblem problem0(data.X(), data.y());
            const LassoFit lasso = problem0.fit(cv0.lambda_min, cfg.solver);
            const LassoFit lasso_1se = problem0.fit(cv0.lambda_1se, cfg.solver);
            if (!lasso.converged) throw NumericError(lasso.diagnostic);
            if (!lasso_1se.converged) throw NumericError(lasso_1se.diagnostic);
            out.lambda0 = cv0.lambda_min;
            out.sigma_hat = residual_sigma(data.X(), data.y(), lasso_1se.beta);

            const NodewiseProblem node(data.X(), 0);
            const CandidateGrid cand = build_candidate_grid(data.X(), 0, cfg.kappa, cfg.path_size);
            const bool need_grid = wants(cfg, Method::Stps) || wants(cfg, Method::Cv) ||
                                   wants(cfg, Method::Zz);
            std::vector<NodewiseFit> fits;
            TuneTrace trace;
            if (need_grid) {
                fits = node.fit_grid(cand.descending(), cfg.solver);
                for (const auto& f : fits) trace.points.push_back(trace_point(f, data.X()));
            }
            std::optional<std::size_t> cv_index;
            if (wants(cfg, Method::Stps) || wants(cfg, Method::Cv)) {
                const auto cv1 = kfold_cv(node.others(), data.X().col(0), cand.descending(),
                                          cfg.folds, derive_seed(out.seed, kNodewiseCvStream),
                                          cfg.solver);
                // CV runs on the descending grid; fits are ascending.
                cv_index = fits.size() - 1 - cv1.index_min;
            }

            for (const Method m : cfg.methods) {
                switch (m) {
                    case Method::Oracle:
                        break;
                    case Method::Stps: {
                        const double eta = std::sqrt(fits[*cv_index].tau_tilde_sq / static_cast<double>(n));
                        const auto sel = select_from_trace(trace, eta);
                        const auto& fit = fits[sel.selected];
                        out.estimates.push_back(from_inference(
                            m, debias(data, lasso, fit, out.sigma_hat, cfg.level)));
                        if (index % 100 == 0) {
                            const auto dec = decomposition_check(data, lasso, fit, draw.beta0, draw.eps);
                            out.identity_residual = std::abs(dec.w1 + dec.delta1 - dec.scaled_error);
                            out.holder_slack = dec.holder_bound - std::abs(dec.delta1);
                        }
                        break;
                    }
                    case Method::Cv:
                        out.estimates.push_back(from_inference(
                            m, debias(data, lasso, fits[*cv_index], out.sigma_hat, cfg.level)));
                        break;
                    case Method::Zz: {
                        const auto sel = select_from_trace(trace, zz_threshold(n, dim));
                        out.estimates.push_back(from_inference(
                            m, debias(data, lasso, fits[sel.selected], out.sigma_hat, cfg.level)));
                        break;
                    }
                    case Method::Univ: {
                        const double lam = universal_lambda(std::sqrt(design.tau1_sq), n, cfg.p);
                        const auto fit = node.fit(lam, cfg.solver);
                        out.estimates.push_back(from_inference(
                            m, debias(data, lasso, fit, out.sigma_hat, cfg.level)));
                        break;
                    }
                }
            }
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
        out.estimates.clear();
    }
    return out;
}

SimReport run_simulation(const SimConfig& cfg, int jobs) {
    const auto start = std::chrono::steady_clock::now();
    const SimDesign design = build_design(cfg);

    SimReport report;
    report.config = cfg;
    for (const Method m : cfg.methods) {
        if (m == Method::Oracle && cfg.beta_pattern == BetaPattern::Dense) continue;
        if (std::find(report.methods.begin(), report.methods.end(), m) == report.methods.end())
            report.methods.push_back(m);
    }
    report.replications.resize(static_cast<std::size_t>(cfg.reps));

    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int r = next++; r < cfg.reps; r = next++)
            report.replications[static_cast<std::size_t>(r)] = run_replication(cfg, design, r);
    };
    const int workers = std::max(1, std::min(jobs, cfg.reps));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const auto& rep : report.replications)
        if (rep.failed) ++report.failures;
    if (report.failures * 100 > cfg.reps) {
        const auto& first = *std::find_if(report.replications.begin(), report.replications.end(),
                                          [](const ReplicationResult& r) { return r.failed; });
        throw NumericError(std::to_string(report.failures) + " of " + std::to_string(cfg.reps) +
                           " replications failed (first: replication " +
                           std::to_string(first.index) + ", seed " + std::to_string(first.seed) +
                           ": " + first.error + ")");
    }

    for (const Method m : report.methods) {
        std::vector<const MethodEstimate*> rows;
        for (const auto& rep : report.replications)
            for (const auto& est : rep.estimates)
                if (est.method == m) rows.push_back(&est);
        MethodSummary s;
        s.method = m;
        s.count = static_cast<int>(rows.size());
        if (!rows.empty()) {
            double mean = 0.0, covered = 0.0, length = 0.0;
            for (const auto* e : rows) {
                mean += e->estimate;
                covered += (e->ci_lower <= kTargetCoefficient && kTargetCoefficient <= e->ci_upper) ? 1.0 : 0.0;
                length += e->ci_upper - e->ci_lower;
            }
            const double count = static_cast<double>(rows.size());
            mean /= count;
            double ss = 0.0;
            for (const auto* e : rows) ss += (e->estimate - mean) * (e->estimate - mean);
            s.bias = mean - kTargetCoefficient;
            s.sd = rows.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
            s.coverage = covered / count;
            s.mean_length = length / count;
        }
        report.summaries.push_back(s);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    if (s == "-0.000") s = "0.000";
    return s;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string report_table_csv(const SimReport& report) {
    std::ostringstream os;
    os << "statistic";
    for (const auto& s : report.summaries) os << ',' << to_string(s.method);
    os << '\n';
    const std::pair<const char*, double MethodSummary::*> rows[] = {
        {"Bias", &MethodSummary::bias},
        {"SD", &MethodSummary::sd},
        {"Cover", &MethodSummary::coverage},
        {"Length", &MethodSummary::mean_length},
    };
    for (const auto& [label, field] : rows) {
        os << label;
        for (const auto& s : report.summaries) os << ',' << fixed3(s.*field);
        os << '\n';
    }
    return os.str();
}

std::string estimates_dump_csv(const SimReport& report) {
    std::ostringstream os;
    os << "replication,seed,method,estimate,std_error,ci_lower,ci_upper,lambda1,covered\n";
    for (const auto& rep : report.replications) {
        for (const auto& e : rep.estimates) {
            const bool covered = e.ci_lower <= kTargetCoefficient && kTargetCoefficient <= e.ci_upper;
            os << rep.index << ',' << rep.seed << ',' << to_string(e.method) << ',' << full(e.estimate)
               << ',' << full(e.std_error) << ',' << full(e.ci_lower) << ',' << full(e.ci_upper)
               << ',' << full(e.lambda1) << ',' << (covered ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

}  // namespace dlasso
