// dlasso: debiased Lasso inference, node-wise tuning traces and Monte Carlo runs.
//
//   dlasso infer --csv data.csv --response y --target x1 --controls a,b,c [--interactions]
//   dlasso simulate --config table1.cfg [--reps N] [--jobs J] [--dump-estimates]
//   dlasso tune-trace (--csv data.csv --target x1 --controls a,b | --synthetic 100x200)
//
// Every command writes its outputs plus manifest.json into --out.

#include "dlasso/cv.hpp"
#include "dlasso/dataset.hpp"
#include "dlasso/errors.hpp"
#include "dlasso/inference.hpp"
#include "dlasso/lasso.hpp"
#include "dlasso/nodewise.hpp"
#include "dlasso/rng.hpp"
#include "dlasso/simulation.hpp"
#include "dlasso/stps.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace dlasso;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kArgument = 2, kData = 3, kNumeric = 4 };

// Stream seeds inside one infer / tune-trace run.
enum : std::uint64_t { kLassoCv = 1, kNodeCv = 2, kTauCv = 3, kSynthetic = 4 };

// Name of the step currently running; error messages are prefixed with it.
std::string stage = "arguments";

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << text;
    if (!out) throw ArgumentError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json manifest(const std::string& command, json config, json seeds, const std::string& started) {
    return {{"command", command},
            {"version", kVersion},
            {"config", std::move(config)},
            {"seeds", std::move(seeds)},
            {"started", started},
            {"finished", utc_now()}};
}

fs::path prepare_out(const std::string& dir) {
    const fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw ArgumentError("cannot create output directory " + dir);
    return out;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty()) out.push_back(part);
    }
    return out;
}

// Target column first, then the controls (optionally expanded with pairwise products).
Dataset assemble_design(const std::string& csv, const std::string& response, const std::string& target,
                        const std::vector<std::string>& controls, bool interactions) {
    if (controls.empty()) throw ArgumentError("--controls needs at least one column");
    for (const auto& c : controls)
        if (c == target || c == response) throw ArgumentError("control '" + c + "' repeats the response or target");
    stage = "loading " + csv;
    const Dataset base = load_csv(csv, response, controls);
    const Dataset tgt = load_csv(csv, response, {target});
    const Dataset ctl = interactions ? expand_interactions(base) : base;
    Eigen::MatrixXd X(ctl.n(), ctl.p() + 1);
    X.col(0) = tgt.X().col(0);
    X.rightCols(ctl.p()) = ctl.X();
    std::vector<std::string> names{target};
    names.insert(names.end(), ctl.column_names().begin(), ctl.column_names().end());
    return Dataset(ctl.y(), X, names);
}

Alternative parse_alternative(const std::string& s) {
    if (s == "two-sided") return Alternative::TwoSided;
    if (s == "less") return Alternative::Less;
    if (s == "greater") return Alternative::Greater;
    throw ArgumentError("unknown alternative '" + s + "'");
}

json trace_json(const StpsResult& r) {
    json j{{"lambda1", r.lambda1}, {"eta_star", r.eta_star}, {"branch", to_string(r.branch)},
           {"selected_index", r.selected}};
    if (r.lambda_star) j["lambda_star"] = *r.lambda_star;
    if (r.omega_star_half) j["omega_half_cap"] = kVarianceInflation * *r.omega_star_half;
    if (r.cv_lambda) j["cv_lambda"] = *r.cv_lambda;
    return j;
}

json result_json(const InferenceResult& r) {
    return {{"target", r.target},       {"estimate", r.b1},         {"lasso_coefficient", r.beta1_lasso},
            {"omega", r.omega},         {"sigma_hat", r.sigma_hat}, {"std_error", r.std_error},
            {"level", r.level},         {"ci_lower", r.ci_lower},   {"ci_upper", r.ci_upper},
            {"t_stat", r.t_stat},       {"p_value", r.p_value},     {"alternative", to_string(r.alternative)},
            {"lambda0", r.lambda0},     {"lambda1", r.lambda1}};
}

struct InferArgs {
    std::string csv, response, target, selector = "stps", alternative = "two-sided", out = ".";
    std::vector<std::string> controls;
    bool interactions = false, scale = false;
    double level = 0.95, kappa = 0.001;
    std::optional<double> tau1;
    std::uint64_t seed = 1;
    int folds = 10;
};

int cmd_infer(const InferArgs& a) {
    const std::string started = utc_now();
    stage = "arguments";
    if (!(a.level > 0.0 && a.level < 1.0)) throw ArgumentError("--level must lie in (0,1)");
    if (!(a.kappa > 0.0)) throw ArgumentError("--kappa must be positive");
    if (a.folds < 2) throw ArgumentError("--folds must be at least 2");
    if (a.tau1 && !(*a.tau1 > 0.0)) throw ArgumentError("--tau1 must be positive");
    const Alternative alt = parse_alternative(a.alternative);
    if (a.selector != "stps" && a.selector != "cv" && a.selector != "zz" && a.selector != "univ")
        throw ArgumentError("--selector must be one of stps, cv, zz, univ");
    const auto controls = split_list(a.controls);
    const fs::path out = prepare_out(a.out);

    Dataset raw = assemble_design(a.csv, a.response, a.target, controls, a.interactions);
    stage = "centering";
    Dataset data = center(raw).first;
    if (a.scale) data = standardize(data).first;
    const Eigen::Index n = data.n();
    const Eigen::Index dim = data.p();

    stage = "lasso";
    const LambdaGrid grid0 = lambda_path(data, 100, n < dim ? 0.01 : 1e-4);
    const auto cv0 = kfold_cv(data, grid0, a.folds, derive_seed(a.seed, kLassoCv));
    const LassoFit lasso = fit_lasso(data, cv0.lambda_min);
    if (!lasso.converged) throw NumericError(lasso.diagnostic);
    const LassoFit lasso_1se = fit_lasso(data, cv0.lambda_1se);
    if (!lasso_1se.converged) throw NumericError(lasso_1se.diagnostic);
    const double sigma = residual_sigma(data.X(), data.y(), lasso_1se.beta);

    stage = "node-wise tuning (" + a.selector + ")";
    const CandidateGrid cand = build_candidate_grid(data.X(), 0, a.kappa);
    const NodewiseProblem node(data.X(), 0);
    json selection{{"selector", a.selector}};
    double lambda1 = 0.0;
    if (a.selector == "stps") {
        const auto r = select_stps(data.X(), 0, cand, a.folds, derive_seed(a.seed, kNodeCv));
        lambda1 = r.lambda1;
        selection.update(trace_json(r));
    } else if (a.selector == "zz") {
        const auto r = select_zz(data.X(), 0, cand);
        lambda1 = r.lambda1;
        selection.update(trace_json(r));
    } else if (a.selector == "cv") {
        lambda1 = select_cv_nodewise(data.X(), 0, cand, a.folds, derive_seed(a.seed, kNodeCv));
    } else {
        double tau1 = 0.0;
        if (a.tau1) {
            tau1 = *a.tau1;
        } else {
            // Residual variance of the node-wise one-SE fit.
            const auto cv1 = kfold_cv(node.others(), data.X().col(0), cand.descending(), a.folds,
                                      derive_seed(a.seed, kTauCv));
            tau1 = std::sqrt(node.fit(cv1.lambda_1se, SolverConfig{}).tau_tilde_sq);
            selection["tau1_estimated"] = true;
        }
        selection["tau1"] = tau1;
        lambda1 = universal_lambda(tau1, n, dim - 1);
    }
    const NodewiseFit nfit = node.fit(lambda1, SolverConfig{});

    stage = "inference";
    InferenceResult r = debias(data, lasso, nfit, sigma, a.level, alt);
    r.lambda0 = cv0.lambda_min;
    r.lambda1 = lambda1;

    std::cout << std::setprecision(6) << a.target << ": estimate " << r.b1 << ", se " << r.std_error
              << ", " << a.level * 100 << "% CI [" << r.ci_lower << ", " << r.ci_upper << "], p "
              << r.p_value << " (n=" << n << ", controls=" << dim - 1 << ")\n";

    stage = "writing outputs";
    json cfg{{"csv", a.csv},       {"response", a.response},   {"target", a.target},
             {"controls", controls}, {"interactions", a.interactions}, {"scale", a.scale},
             {"selector", a.selector}, {"level", a.level},     {"kappa", a.kappa},
             {"folds", a.folds},     {"alternative", a.alternative}};
    if (a.tau1) cfg["tau1"] = *a.tau1;
    json doc = result_json(r);
    doc["selection"] = selection;
    doc["n"] = n;
    doc["controls"] = dim - 1;
    write_json(out / "inference.json", doc);
    write_json(out / "manifest.json",
               manifest("infer", cfg, {{"master", a.seed}}, started));
    return kOk;
}

struct SimulateArgs {
    std::string config, out = ".";
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool dump = false;
};

int cmd_simulate(const SimulateArgs& a) {
    const std::string started = utc_now();
    stage = "reading " + a.config;
    SimConfig cfg = load_sim_config(a.config);
    if (a.reps) cfg.reps = *a.reps;
    if (a.seed) cfg.seed = *a.seed;
    cfg.validate();
    if (a.jobs < 1) throw ArgumentError("--jobs must be at least 1");
    const fs::path out = prepare_out(a.out);

    stage = "simulation";
    const SimReport rep = run_simulation(cfg, a.jobs);
    std::cout << report_table_csv(rep);
    std::cerr << rep.replications.size() << " replications, " << rep.failures << " failed, "
              << std::fixed << std::setprecision(1) << rep.wall_seconds << "s\n";

    stage = "writing outputs";
    write_text(out / "report.csv", report_table_csv(rep));
    if (a.dump) write_text(out / "estimates.csv", estimates_dump_csv(rep));
    json summaries = json::array();
    for (const auto& s : rep.summaries)
        summaries.push_back({{"method", to_string(s.method)}, {"count", s.count}, {"bias", s.bias},
                             {"sd", s.sd}, {"coverage", s.coverage}, {"mean_length", s.mean_length}});
    json failures = json::array();
    for (const auto& r : rep.replications)
        if (r.failed) failures.push_back({{"index", r.index}, {"seed", r.seed}, {"error", r.error}});
    json m = manifest("simulate", {{"config_text", to_config_text(cfg)}, {"jobs", a.jobs}},
                      {{"master", cfg.seed}}, started);
    m["summaries"] = summaries;
    m["failed_replications"] = failures;
    m["wall_seconds"] = rep.wall_seconds;
    write_json(out / "manifest.json", m);
    return kOk;
}

struct TraceArgs {
    std::string csv, target, synthetic, out = ".";
    std::vector<std::string> controls;
    std::vector<double> lambdas;
    bool interactions = false;
    double kappa = 0.001;
    int path_size = 100, folds = 10;
    std::uint64_t seed = 1;
};

int cmd_tune_trace(const TraceArgs& a) {
    const std::string started = utc_now();
    stage = "arguments";
    if (a.csv.empty() == a.synthetic.empty()) throw ArgumentError("give exactly one of --csv or --synthetic");
    const fs::path out = prepare_out(a.out);

    Eigen::MatrixXd X;
    json source;
    if (!a.synthetic.empty()) {
        long rows = 0, cols = 0;
        char sep = 0;
        std::istringstream is(a.synthetic);
        if (!(is >> rows >> sep >> cols) || sep != 'x' || rows < 2 || cols < 2 || !is.eof())
            throw ArgumentError("--synthetic expects NxP, e.g. 100x200");
        RandomStream rng(derive_seed(a.seed, kSynthetic));
        X.resize(rows, cols);
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j) X(i, j) = rng.normal();
        source = {{"synthetic", a.synthetic}};
    } else {
        if (a.target.empty()) throw ArgumentError("--target is required with --csv");
        const auto controls = split_list(a.controls);
        if (controls.empty()) throw ArgumentError("--controls needs at least one column");
        stage = "loading " + a.csv;
        // The target is loaded as the response column so no outcome is needed.
        const Dataset base = load_csv(a.csv, a.target, controls);
        const Dataset ctl = a.interactions ? expand_interactions(base) : base;
        X.resize(ctl.n(), ctl.p() + 1);
        X.col(0) = ctl.y();
        X.rightCols(ctl.p()) = ctl.X();
        source = {{"csv", a.csv}, {"target", a.target}, {"controls", controls},
                  {"interactions", a.interactions}};
    }
    X.rowwise() -= X.colwise().mean();

    stage = "candidate grid";
    const CandidateGrid cand = a.lambdas.empty() ? build_candidate_grid(X, 0, a.kappa, a.path_size)
                                                 : CandidateGrid::from_values(a.lambdas);

    stage = "trace";
    const NodewiseProblem node(X, 0);
    const auto fits = node.fit_grid(cand.descending(), SolverConfig{});
    TuneTrace trace;
    for (const auto& f : fits) trace.points.push_back(trace_point(f, X));

    stage = "selection";
    const auto n = static_cast<double>(X.rows());
    json annotations;
    // eta* needs a node-wise CV, which needs at least two grid points to mean anything.
    if (cand.values.size() >= 2) {
        const auto [eta, cv_lambda] = eta_star(X, 0, cand, a.folds, derive_seed(a.seed, kNodeCv));
        auto stps = select_from_trace(trace, eta);
        stps.cv_lambda = cv_lambda;
        annotations["stps"] = trace_json(stps);
    } else {
        annotations["stps"] = trace_json(select_from_trace(trace, std::sqrt(trace.points[0].tau_tilde_sq / n)));
    }
    annotations["zz"] = trace_json(select_from_trace(trace, zz_threshold(X.rows(), X.cols())));
    annotations["f_decrease"] = trace.f_decrease();
    annotations["tau_decrease"] = trace.tau_decrease();

    stage = "writing outputs";
    std::ostringstream csv;
    csv << std::setprecision(17) << "lambda,f,omega,tau_tilde_sq\n";
    for (const auto& p : trace.points)
        csv << p.lambda << ',' << p.f_value << ',' << p.omega_value << ',' << p.tau_tilde_sq << '\n';
    write_text(out / "trace.csv", csv.str());
    write_json(out / "selections.json", annotations);
    json cfg = source;
    cfg["kappa"] = a.kappa;
    cfg["path_size"] = a.path_size;
    cfg["folds"] = a.folds;
    if (!a.lambdas.empty()) cfg["lambdas"] = a.lambdas;
    write_json(out / "manifest.json", manifest("tune-trace", cfg, {{"master", a.seed}}, started));
    std::cout << trace.points.size() << " grid points; STPS lambda1 " << annotations["stps"]["lambda1"]
              << " (" << annotations["stps"]["branch"].get<std::string>() << "), ZZ lambda1 "
              << annotations["zz"]["lambda1"] << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Debiased Lasso inference with node-wise tuning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    InferArgs ia;
    auto* infer = app.add_subcommand("infer", "Confidence interval and test for one coefficient");
    infer->add_option("--csv", ia.csv, "Input CSV with a header row")->required();
    infer->add_option("--response", ia.response, "Outcome column")->required();
    infer->add_option("--target", ia.target, "Column whose coefficient is tested")->required();
    infer->add_option("--controls", ia.controls, "Control columns (comma separated or repeated)")->required();
    infer->add_flag("--interactions", ia.interactions, "Add pairwise products of the controls");
    infer->add_flag("--scale", ia.scale, "Standardize columns after centering");
    infer->add_option("--selector", ia.selector, "stps, cv, zz or univ")->capture_default_str();
    infer->add_option("--level", ia.level, "Confidence level")->capture_default_str();
    infer->add_option("--kappa", ia.kappa, "Small-value grid constant")->capture_default_str();
    infer->add_option("--tau1", ia.tau1, "Node-wise noise scale for --selector univ");
    infer->add_option("--alternative", ia.alternative, "two-sided, less or greater")->capture_default_str();
    infer->add_option("--folds", ia.folds, "Cross-validation folds")->capture_default_str();
    infer->add_option("--seed", ia.seed, "Master seed")->capture_default_str();
    infer->add_option("--out", ia.out, "Output directory")->capture_default_str();

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study");
    simulate->add_option("--config", sa.config, "key = value configuration file")->required();
    simulate->add_option("--reps", sa.reps, "Override the replication count");
    simulate->add_option("--seed", sa.seed, "Override the master seed");
    simulate->add_option("--jobs", sa.jobs, "Worker threads")->capture_default_str();
    simulate->add_flag("--dump-estimates", sa.dump, "Write per-replication estimates");
    simulate->add_option("--out", sa.out, "Output directory")->capture_default_str();

    TraceArgs ta;
    auto* tt = app.add_subcommand("tune-trace", "Bias factor and variance along the node-wise grid");
    tt->add_option("--csv", ta.csv, "Input CSV with a header row");
    tt->add_option("--synthetic", ta.synthetic, "Gaussian design NxP instead of a CSV");
    tt->add_option("--target", ta.target, "Node-wise target column (CSV input)");
    tt->add_option("--controls", ta.controls, "Other columns (CSV input)");
    tt->add_flag("--interactions", ta.interactions, "Add pairwise products of the controls");
    tt->add_option("--kappa", ta.kappa, "Small-value grid constant")->capture_default_str();
    tt->add_option("--path-size", ta.path_size, "Log-spaced path length")->capture_default_str();
    tt->add_option("--lambdas", ta.lambdas, "Explicit grid, replaces the default one")->delimiter(',');
    tt->add_option("--folds", ta.folds, "Cross-validation folds")->capture_default_str();
    tt->add_option("--seed", ta.seed, "Master seed")->capture_default_str();
    tt->add_option("--out", ta.out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kArgument;
    }

    try {
        if (*infer) return cmd_infer(ia);
        if (*simulate) return cmd_simulate(sa);
        return cmd_tune_trace(ta);
    } catch (const ArgumentError& e) {
        std::cerr << "error (" << stage << "): " << e.what() << '\n';
        return kArgument;
    } catch (const DataError& e) {
        std::cerr << "data error (" << stage << "): " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error (" << stage << "): " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error (" << stage << "): " << e.what() << '\n';
        return kNumeric;
    }
}
