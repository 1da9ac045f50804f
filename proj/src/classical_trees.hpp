#pragma once

#include "szbp/classical.hpp"
#include "szbp/rng.hpp"

namespace szbp::classical::detail {

struct TreeParams {
    int max_depth = 0;  // 0 = unlimited
    std::size_t min_samples_leaf = 1;
    std::size_t max_features = 0;  // 0 or >= d = all features
};

/// CART with Gini impurity over the given rows (duplicates allowed, as in a bootstrap sample).
TreeModel build_tree(const Matrix& X, std::span<const int> y, std::vector<std::size_t> rows, const TreeParams& params,
                     Rng& rng);

std::vector<NamedArray> tree_arrays(const TreeModel& tree, const std::string& prefix);
TreeModel tree_from_arrays(const std::vector<NamedArray>& arrays, const std::string& prefix);

}  // namespace szbp::classical::detail
