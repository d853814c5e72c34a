#include "dlasso/dataset.hpp"

#include "dlasso/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace dlasso {

namespace {

std::vector<std::string> default_names(Eigen::Index p) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

// Splits one CSV record. Quoted fields may contain commas and doubled quotes;
// embedded newlines are not supported.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\r' && i + 1 == line.size()) {
            break;
        } else {
            field += c;
        }
    }
    if (quoted) throw DataError("unterminated quoted field on line " + std::to_string(line_no));
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, std::size_t line_no, const std::string& column) {
    const std::string text = trim(raw);
    const auto where = [&] {
        return "row " + std::to_string(line_no) + ", column '" + column + "'";
    };
    if (text.empty()) throw DataError("empty cell at " + where());
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE)
        throw DataError("non-numeric cell '" + text + "' at " + where());
    if (!std::isfinite(value)) throw DataError("non-finite cell '" + text + "' at " + where());
    return value;
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> column_names,
                 bool centered)
    : y_(std::move(y)), X_(std::move(X)), names_(std::move(column_names)), centered_(centered) {
    if (X_.rows() < 2) throw DataError("dataset needs at least 2 rows");
    if (X_.cols() < 1) throw DataError("dataset needs at least 1 covariate");
    if (y_.size() != X_.rows())
        throw DataError("response length " + std::to_string(y_.size()) +
                        " does not match design rows " + std::to_string(X_.rows()));
    if (static_cast<Eigen::Index>(names_.size()) != X_.cols())
        throw DataError("column name count does not match design columns");
    for (Eigen::Index j = 0; j < X_.cols(); ++j) {
        if ((X_.col(j).array() == 0.0).all())
            throw DataError("column '" + names_[static_cast<std::size_t>(j)] + "' is identically zero");
    }
}

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X, bool centered)
    : Dataset(std::move(y), X, default_names(X.cols()), centered) {}

Eigen::Index Dataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j)
        if (names_[j] == name) return static_cast<Eigen::Index>(j);
    throw DataError("no column named '" + name + "'");
}

Dataset load_csv(const std::filesystem::path& path, const std::string& response,
                 const std::vector<std::string>& covariates) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file " + path.string() + " is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_record(line, 1);

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t k = 0; k < header.size(); ++k) position.emplace(trim(header[k]), k);
    const auto locate = [&](const std::string& name) {
        const auto it = position.find(name);
        if (it == position.end()) throw DataError("CSV has no column named '" + name + "'");
        return it->second;
    };
    const std::size_t y_col = locate(response);
    std::vector<std::size_t> x_cols;
    for (const auto& name : covariates) x_cols.push_back(locate(name));

    std::vector<double> ys;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line == "\r") continue;
        const auto fields = split_record(line, line_no);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
        ys.push_back(parse_cell(fields[y_col], line_no, response));
        std::vector<double> row;
        row.reserve(x_cols.size());
        for (std::size_t k = 0; k < x_cols.size(); ++k)
            row.push_back(parse_cell(fields[x_cols[k]], line_no, covariates[k]));
        rows.push_back(std::move(row));
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(x_cols.size());
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = ys[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j)
            X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    if (n >= 2) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if ((X.col(j).array() == X(0, j)).all())
                throw DataError("column '" + covariates[static_cast<std::size_t>(j)] +
                                "' is constant");
        }
    }
    return Dataset(std::move(y), std::move(X), covariates, false);
}

Dataset expand_interactions(const Dataset& d) {
    if (d.centered()) throw ArgumentError("expand_interactions expects an uncentered dataset");
    const Eigen::Index p = d.p();
    const Eigen::Index total = p + p * (p - 1) / 2;
    Eigen::MatrixXd X(d.n(), total);
    X.leftCols(p) = d.X();
    std::vector<std::string> names = d.column_names();
    Eigen::Index col = p;
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            X.col(col++) = d.X().col(j).cwiseProduct(d.X().col(k));
            names.push_back(d.column_names()[static_cast<std::size_t>(j)] + ":" +
                            d.column_names()[static_cast<std::size_t>(k)]);
        }
    }
    return Dataset(d.y(), std::move(X), std::move(names), false);
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& X) {
    return X.colwise().mean().transpose();
}

std::pair<Dataset, CenteringRecord> center(const Dataset& d) {
    if (d.centered()) throw ArgumentError("dataset is already centered");
    CenteringRecord record{d.y().mean(), column_means(d.X())};
    Eigen::VectorXd y = d.y().array() - record.y_mean;
    Eigen::MatrixXd X = d.X().rowwise() - record.x_means.transpose();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (X.col(j).lpNorm<Eigen::Infinity>() <=
            1e-12 * std::max(1.0, std::abs(record.x_means(j))))
            throw DataError("column '" + d.column_names()[static_cast<std::size_t>(j)] +
                            "' is constant");
    }
    return {Dataset(std::move(y), std::move(X), d.column_names(), true), std::move(record)};
}

Dataset un_center(const Dataset& d, const CenteringRecord& record) {
    if (!d.centered()) throw ArgumentError("dataset is not centered");
    if (record.x_means.size() != d.p()) throw ArgumentError("centering record has wrong length");
    Eigen::VectorXd y = d.y().array() + record.y_mean;
    Eigen::MatrixXd X = d.X().rowwise() + record.x_means.transpose();
    return Dataset(std::move(y), std::move(X), d.column_names(), false);
}

std::pair<Dataset, ScalingRecord> standardize(const Dataset& d) {
    if (!d.centered()) throw ArgumentError("standardize expects a centered dataset");
    const double n = static_cast<double>(d.n());
    ScalingRecord record{(d.X().colwise().squaredNorm().array() / n).sqrt().transpose()};
    Eigen::MatrixXd X = d.X() * record.x_scales.cwiseInverse().asDiagonal();
    return {Dataset(d.y(), std::move(X), d.column_names(), true), std::move(record)};
}

}  // namespace dlasso
