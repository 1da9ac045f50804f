#pragma once

// Functional network connectivity: pairwise Pearson correlation of ICN time
// courses, flattened lower triangle, min-max scaling and chi-square ranking.

#include "szbp/core.hpp"

#include <span>
#include <utility>
#include <vector>

namespace szbp::fnc {

/// Sample Pearson correlation. Throws NumericError if either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Length of the flattened strict lower triangle for n channels.
inline std::size_t fnc_length(std::size_t channels) { return channels * (channels - 1) / 2; }

/// Flat position of pair (i, j), i > j, in row-major lower-triangle order:
/// (1,0), (2,0), (2,1), (3,0), ...
inline std::size_t pair_index(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }

/// Inverse of pair_index.
std::pair<std::size_t, std::size_t> pair_of(std::size_t index);

/// Correlations over the unpadded columns [0, original_length).
/// Throws NumericError naming the first constant channel.
std::vector<double> compute_fnc(const IcnMatrix& icn);

/// Subjects x features matrix with optional per-feature min/max bounds.
struct FeatureTable {
    Matrix X;
    std::vector<std::size_t> feature_ids;
    std::vector<double> lo;  ///< per-feature fitted minimum (empty until fitted)
    std::vector<double> hi;  ///< per-feature fitted maximum

    bool normalized() const { return !lo.empty(); }
};

/// Table with feature ids 0..cols-1.
FeatureTable make_table(Matrix X);

/// Fits per-feature bounds on X and returns the scaled table. Constant
/// features map to 0.
FeatureTable minmax_normalize_fit(const FeatureTable& table);

/// Scales with previously fitted bounds, clamping into [0, 1].
FeatureTable minmax_apply(std::span<const double> lo, std::span<const double> hi, const FeatureTable& table);

/// Chi-square statistic of class-conditional feature sums against their
/// expectation under independence. Features with zero total score 0.
std::vector<double> chi2_scores(const Matrix& X, std::span<const int> y);

struct SelectionResult {
    std::vector<double> scores;
    std::vector<std::size_t> selected;
};

/// The k highest scores, ordered by descending score then ascending index.
SelectionResult select_top_k(std::span<const double> scores, std::size_t k);

}  // namespace szbp::fnc
