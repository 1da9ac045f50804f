#include "classical_trees.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace szbp::classical {

double TreeModel::score(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t TreeModel::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    // Children are always appended after their parent.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace detail {

namespace {

double gini(double pos, double n) {
    if (n <= 0.0) return 0.0;
    const double p = pos / n;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

struct Pending {
    std::vector<std::size_t> rows;
    int node;
    int depth;
};

std::vector<std::size_t> candidate_features(std::size_t d, std::size_t max_features, Rng& rng) {
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (max_features == 0 || max_features >= d) return all;
    for (std::size_t i = 0; i < max_features; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(d - i));
        std::swap(all[i], all[j]);
    }
    all.resize(max_features);
    std::sort(all.begin(), all.end());
    return all;
}

Split best_split(const Matrix& X, std::span<const int> y, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& features, std::size_t min_leaf) {
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    const std::size_t n = rows.size();
    double total_pos = 0.0;
    for (auto r : rows) total_pos += y[r];

    std::vector<std::pair<double, int>> vals(n);
    for (auto f : features) {
        for (std::size_t i = 0; i < n; ++i) vals[i] = {X(rows[i], f), y[rows[i]]};
        std::sort(vals.begin(), vals.end());
        double left_pos = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            left_pos += vals[i - 1].second;
            if (i < min_leaf || n - i < min_leaf) continue;
            if (vals[i - 1].first == vals[i].first) continue;
            const double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
            const double imp = (nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr)) / static_cast<double>(n);
            if (imp < best.impurity) {
                best.impurity = imp;
                best.feature = static_cast<int>(f);
                double t = 0.5 * (vals[i - 1].first + vals[i].first);
                if (!(t < vals[i].first)) t = vals[i - 1].first;
                best.threshold = t;
            }
        }
    }
    return best;
}

}  // namespace

TreeModel build_tree(const Matrix& X, std::span<const int> y, std::vector<std::size_t> rows, const TreeParams& params,
                     Rng& rng) {
    TreeModel tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({std::move(rows), 0, 0});
    const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);

    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        const std::size_t n = cur.rows.size();
        double pos = 0.0;
        for (auto r : cur.rows) pos += y[r];
        const auto node = static_cast<std::size_t>(cur.node);
        tree.nodes[node].value = n > 0 ? pos / static_cast<double>(n) : 0.5;

        const bool pure = pos == 0.0 || pos == static_cast<double>(n);
        const bool depth_hit = params.max_depth > 0 && cur.depth >= params.max_depth;
        if (pure || depth_hit || n < 2 * min_leaf) continue;

        const auto features = candidate_features(X.cols(), params.max_features, rng);
        const Split s = best_split(X, y, cur.rows, features, min_leaf);
        if (s.feature < 0) continue;

        std::vector<std::size_t> left, right;
        for (auto r : cur.rows) (X(r, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(r);

        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[node].feature = s.feature;
        tree.nodes[node].threshold = s.threshold;
        tree.nodes[node].left = li;
        tree.nodes[node].right = li + 1;
        // Right pushed first so the left subtree is expanded first.
        stack.push_back({std::move(right), li + 1, cur.depth + 1});
        stack.push_back({std::move(left), li, cur.depth + 1});
    }
    return tree;
}

std::vector<NamedArray> tree_arrays(const TreeModel& tree, const std::string& prefix) {
    const std::size_t n = tree.nodes.size();
    NamedArray feature{prefix + "feature", {n}, {}}, threshold{prefix + "threshold", {n}, {}},
        left{prefix + "left", {n}, {}}, right{prefix + "right", {n}, {}}, value{prefix + "value", {n}, {}};
    for (const auto& nd : tree.nodes) {
        feature.data.push_back(nd.feature);
        threshold.data.push_back(nd.threshold);
        left.data.push_back(nd.left);
        right.data.push_back(nd.right);
        value.data.push_back(nd.value);
    }
    return {feature, threshold, left, right, value};
}

TreeModel tree_from_arrays(const std::vector<NamedArray>& arrays, const std::string& prefix) {
    const auto& feature = find_array(arrays, prefix + "feature");
    const auto& threshold = find_array(arrays, prefix + "threshold");
    const auto& left = find_array(arrays, prefix + "left");
    const auto& right = find_array(arrays, prefix + "right");
    const auto& value = find_array(arrays, prefix + "value");
    const std::size_t n = feature.data.size();
    if (n == 0 || threshold.data.size() != n || left.data.size() != n || right.data.size() != n ||
        value.data.size() != n)
        throw DataError("tree arrays '" + prefix + "*' are inconsistent");
    TreeModel tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& nd = tree.nodes[i];
        nd.feature = static_cast<int>(feature.data[i]);
        nd.threshold = threshold.data[i];
        nd.left = static_cast<int>(left.data[i]);
        nd.right = static_cast<int>(right.data[i]);
        nd.value = value.data[i];
        if (nd.feature >= 0 && (nd.left <= static_cast<int>(i) || nd.right <= static_cast<int>(i) ||
                                nd.left >= static_cast<int>(n) || nd.right >= static_cast<int>(n)))
            throw DataError("tree arrays '" + prefix + "*' have invalid child links");
    }
    return tree;
}

}  // namespace detail
}  // namespace szbp::classical
