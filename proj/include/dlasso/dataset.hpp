#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dlasso {

/**
 * Response plus design matrix with column labels.
 *
 * Invariants enforced by the constructor: n >= 2, p >= 1, y.size() == X.rows(),
 * names.size() == X.cols(), and no column of X is identically zero.
 */
class Dataset {
public:
    Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> column_names,
            bool centered = false);

    /// Unlabelled convenience constructor; columns are named x1..xp.
    Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, bool centered = false);

    const Eigen::VectorXd& y() const noexcept { return y_; }
    const Eigen::MatrixXd& X() const noexcept { return X_; }
    const std::vector<std::string>& column_names() const noexcept { return names_; }
    bool centered() const noexcept { return centered_; }

    Eigen::Index n() const noexcept { return X_.rows(); }
    Eigen::Index p() const noexcept { return X_.cols(); }

    /// Index of a named column, or throws DataError.
    Eigen::Index column_index(const std::string& name) const;

private:
    Eigen::VectorXd y_;
    Eigen::MatrixXd X_;
    std::vector<std::string> names_;
    bool centered_;
};

/// Means removed by center(); un_center() adds them back.
struct CenteringRecord {
    double y_mean = 0.0;
    Eigen::VectorXd x_means;
};

/// Columnwise scale factors removed by standardize().
struct ScalingRecord {
    Eigen::VectorXd x_scales;
};

/**
 * Reads an RFC-4180 style CSV with a header row. The response and covariates are
 * picked by header name; covariate order in the result follows `covariates`.
 */
Dataset load_csv(const std::filesystem::path& path, const std::string& response,
                 const std::vector<std::string>& covariates);

/// Appends all pairwise products X_j * X_k (j < k), named "a:b", after the original columns.
Dataset expand_interactions(const Dataset& d);

std::pair<Dataset, CenteringRecord> center(const Dataset& d);
Dataset un_center(const Dataset& d, const CenteringRecord& record);

/// Divides each column of a centered dataset by its root mean square.
std::pair<Dataset, ScalingRecord> standardize(const Dataset& d);

/// Column means of a matrix.
Eigen::VectorXd column_means(const Eigen::MatrixXd& X);

}  // namespace dlasso
