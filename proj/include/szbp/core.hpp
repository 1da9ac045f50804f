#pragma once

// Shared value types: dense matrices, ICN time-course matrices, subject
// records and the error hierarchy used across the pipeline.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace szbp {

/// Number of intrinsic connectivity networks per subject in the cohort format.
inline constexpr std::size_t kIcnChannels = 105;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Model feature space does not match the supplied data.
class FeatureMismatchError : public DataError {
public:
    using DataError::DataError;
};

/// Degenerate numerics: zero variance, singular systems, non-finite values (exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

enum class Label : int { BP = 0, SZ = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }
std::string to_string(Label l);
std::optional<Label> parse_label(const std::string& text);

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    /// Rows picked by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> idx) const;
    /// Columns picked by index, in the given order.
    Matrix select_cols(std::span<const std::size_t> idx) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// One subject's ICN time courses: channels x time, channel-major.
/// Columns at or beyond original_length are zero padding.
struct IcnMatrix {
    Matrix data;
    double fs = 2.0;
    std::size_t original_length = 0;

    std::size_t channels() const { return data.rows(); }
    std::size_t length() const { return data.cols(); }

    bool operator==(const IcnMatrix&) const = default;
};

/// Builds an IcnMatrix, checking the shape and finiteness invariants.
IcnMatrix make_icn(Matrix data, double fs);

struct SubjectRecord {
    std::string subject_id;
    std::optional<Label> label;
    IcnMatrix icn;
    std::optional<std::vector<double>> fnc;

    bool operator==(const SubjectRecord&) const = default;
};

struct Dataset {
    std::vector<SubjectRecord> subjects;
    double fs = 2.0;
    std::size_t max_length = 0;

    std::size_t size() const { return subjects.size(); }
    bool operator==(const Dataset&) const = default;
};

/// Labels of a dataset as 0/1 ints; throws DataError if any subject is unlabeled.
std::vector<int> labels_of(const Dataset& ds);

}  // namespace szbp
