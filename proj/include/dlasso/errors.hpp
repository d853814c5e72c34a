#pragma once

#include <stdexcept>
#include <string>

namespace dlasso {

// Invalid caller input: bad flag, bad shape, out-of-range parameter.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or unusable data: missing columns, unparsable cells, constant columns.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically degenerate quantity (zero residual variance, singular system, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dlasso
