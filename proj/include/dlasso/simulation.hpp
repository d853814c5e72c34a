#pragma once

#include "dlasso/lasso.hpp"
#include "dlasso/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dlasso {

enum class Setting { One, Two };
enum class BetaPattern { Sparse, Moderate, Dense };
enum class GammaPattern { Sparse, Dense };
enum class SigmaStructure { Identity, Toeplitz, Equicorr };
enum class Method { Oracle, Stps, Cv, Univ, Zz };

std::string to_string(BetaPattern v);
std::string to_string(GammaPattern v);
std::string to_string(SigmaStructure v);
std::string to_string(Method v);
Method parse_method(const std::string& text);

/// The true coefficient of interest in every design.
inline constexpr double kTargetCoefficient = 1.5;

struct SimConfig {
    Setting setting = Setting::One;
    int n = 100;
    int p = 200;
    BetaPattern beta_pattern = BetaPattern::Sparse;
    GammaPattern gamma_pattern = GammaPattern::Sparse;
    SigmaStructure sigma = SigmaStructure::Identity;
    double rho = 0.3;
    double r2_y = 0.8;
    double r2_x = 0.5;
    int reps = 100;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::Oracle, Method::Stps, Method::Cv, Method::Univ, Method::Zz};
    int folds = 10;
    double kappa = 0.001;
    double level = 0.95;
    int path_size = 100;
    SolverConfig solver;

    void validate() const;
};

/// Reads `key = value` lines; '#' starts a comment. p defaults to 2n when absent.
SimConfig parse_sim_config(std::istream& in);
SimConfig load_sim_config(const std::filesystem::path& path);
std::string to_config_text(const SimConfig& cfg);

Eigen::MatrixXd build_sigma(SigmaStructure structure, double rho, Eigen::Index dim);

/// Pattern part of beta0 with unit scale and a zero first entry.
Eigen::VectorXd beta_pattern_vector(BetaPattern pattern, Eigen::Index dim);
Eigen::VectorXd build_beta(BetaPattern pattern, Eigen::Index dim, double c_y);
Eigen::VectorXd gamma_pattern_vector(GammaPattern pattern, Eigen::Index dim);
Eigen::VectorXd build_gamma(GammaPattern pattern, Eigen::Index dim, double c_x);

/// Largest c with beta0(c)' Sigma beta0(c) = r2 * noise_var / (1 - r2).
double calibrate_cy(BetaPattern pattern, const Eigen::MatrixXd& Sigma, double r2_y,
                    double noise_var = 1.0);
/// c with c^2 v' Sigma v = r2 / (1 - r2) for unit noise.
double calibrate_cx(GammaPattern pattern, const Eigen::MatrixXd& Sigma, double r2_x);

/// Conditional variance of the first coordinate given the rest.
double population_tau1_sq(const Eigen::MatrixXd& Sigma);

/// Lower Cholesky factor; throws NumericError when Sigma is not positive definite.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& Sigma);

/// n rows of N(0, L L'). Draws are taken row by row from the stream.
Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& factor, Eigen::Index n, RandomStream& rng);

/// max_j ||X_j||^2 / n.
double phi_max_1(const Eigen::MatrixXd& X);

/// One simulated draw with its ground truth.
struct SimDraw {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    Eigen::VectorXd beta0;
    Eigen::VectorXd eps;
};

/// Fixed design quantities shared by every replication of a config.
struct SimDesign {
    Eigen::MatrixXd factor;       ///< Cholesky factor of the sampled block's covariance
    bool identity = true;
    Eigen::VectorXd beta0;
    Eigen::VectorXd gamma0;       ///< Setting 2 only
    double c_y = 0.0;
    double c_x = 0.0;
    double tau1_sq = 1.0;         ///< population node-wise residual variance
};

SimDesign build_design(const SimConfig& cfg);
SimDraw draw_data(const SimConfig& cfg, const SimDesign& design, std::uint64_t rep_seed);

struct MethodEstimate {
    Method method;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double lambda1 = 0.0;  ///< node-wise penalty (0 for the oracle)
};

struct ReplicationResult {
    int index = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double lambda0 = 0.0;
    double sigma_hat = 0.0;
    std::vector<MethodEstimate> estimates;
    /// |W1 + Delta1 - sqrt(n)(b1 - beta01)| and the Holder slack, when checked.
    std::optional<double> identity_residual;
    std::optional<double> holder_slack;
};

struct MethodSummary {
    Method method;
    int count = 0;
    double bias = 0.0;
    double sd = 0.0;
    double coverage = 0.0;
    double mean_length = 0.0;
};

struct SimReport {
    SimConfig config;
    std::vector<Method> methods;  ///< reported columns (oracle dropped for dense beta0)
    std::vector<MethodSummary> summaries;
    std::vector<ReplicationResult> replications;
    int failures = 0;
    double wall_seconds = 0.0;
};

/// Runs one replication; never throws, failures are recorded in the result.
ReplicationResult run_replication(const SimConfig& cfg, const SimDesign& design, int index);

/// Replications run on `jobs` worker threads and are reduced in index order.
SimReport run_simulation(const SimConfig& cfg, int jobs = 1);

/// Rows Bias/SD/Cover/Length, one column per method, three decimals.
std::string report_table_csv(const SimReport& report);
/// One row per (replication, method) at full precision.
std::string estimates_dump_csv(const SimReport& report);

}  // namespace dlasso
