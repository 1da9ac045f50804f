#pragma once

// AUC via the Mann-Whitney rank statistic, stratified holdout splits and
// stratified k-fold plans.

#include <cstdint>
#include <span>
#include <vector>

namespace szbp::eval {

/// Probability that a random positive outscores a random negative, ties
/// counted as half. O(n log n). Throws DataError unless both classes occur.
double auc(std::span<const double> scores, std::span<const int> labels);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> holdout;
};

/// Per-class shuffled partition; each class contributes round-half-up of
/// fraction * class_size to the holdout. Both index lists are ascending.
Split stratified_split(std::span<const int> labels, double fraction, std::uint64_t seed);

struct FoldPlan {
    std::vector<int> fold_of;  ///< subject index -> fold id
    std::size_t k = 0;
    std::uint64_t seed = 0;

    /// Ascending indices in fold f.
    std::vector<std::size_t> members(std::size_t f) const;
    /// Ascending indices not in fold f.
    std::vector<std::size_t> complement(std::size_t f) const;
};

/// Classes are shuffled separately and dealt round-robin over folds, the deal
/// continuing across classes so fold sizes differ by at most one.
FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

}  // namespace szbp::eval
