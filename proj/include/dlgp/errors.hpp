#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlgp {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input dimensions do not match the model or each other.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Cholesky factorization failed even after the full jitter escalation,
// which indicates degenerate hyperparameters or data.
class NotPositiveDefiniteError : public Error {
public:
    using Error::Error;
};

// A prediction was requested from a model with no training data.
class ModelEmptyError : public Error {
public:
    using Error::Error;
};

// A leaf division could not produce a usable tree extension.
class DegenerateDivisionError : public Error {
public:
    using Error::Error;
};

// Evaluation targets have zero variance, so normalized errors are undefined.
class DegenerateTargetsError : public Error {
public:
    using Error::Error;
};

// Invalid experiment configuration; the message names the offending field.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed data file. Row and column are 1-based file coordinates.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(col) + ")"),
          row_(row),
          col_(col) {}

    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

}  // namespace dlgp
