#include "szbp/eval.hpp"

#include "szbp/core.hpp"
#include "szbp/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace szbp::eval {

namespace {

std::array<std::vector<std::size_t>, 2> by_class(std::span<const int> labels) {
    std::array<std::vector<std::size_t>, 2> cls;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ConfigError("labels must be 0/1");
        cls[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    return cls;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ConfigError("auc: scores and labels differ in length");
    for (double s : scores)
        if (!std::isfinite(s)) throw NumericError("auc: non-finite score");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // U = sum over positives of (#negatives strictly below + 0.5 * #negatives tied).
    double n_pos = 0.0, n_neg = 0.0, u = 0.0;
    double neg_below = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double pos_here = 0.0, neg_here = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1)
                pos_here += 1.0;
            else if (labels[order[j]] == 0)
                neg_here += 1.0;
            else
                throw ConfigError("auc: labels must be 0/1");
            ++j;
        }
        u += pos_here * (neg_below + 0.5 * neg_here);
        neg_below += neg_here;
        n_pos += pos_here;
        n_neg += neg_here;
        i = j;
    }
    if (n_pos == 0.0 || n_neg == 0.0) throw DataError("auc: both classes must be present");
    return u / (n_pos * n_neg);
}

Split stratified_split(std::span<const int> labels, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must be in (0, 1)");
    auto cls = by_class(labels);
    Split out;
    for (std::size_t c = 0; c < 2; ++c) {
        auto& members = cls[c];
        const auto n_hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(members.size()) + 0.5));
        if (n_hold < 1 || n_hold >= members.size())
            throw DataError("class " + std::to_string(c) + " with " + std::to_string(members.size()) +
                            " members cannot appear on both sides of a " + std::to_string(fraction) + " split");
        Rng rng(derive_seed(seed, c));
        rng.shuffle(members);
        out.holdout.insert(out.holdout.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_hold));
        out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_hold), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.holdout.begin(), out.holdout.end());
    return out;
}

std::vector<std::size_t> FoldPlan::members(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (static_cast<std::size_t>(fold_of[i]) == f) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (static_cast<std::size_t>(fold_of[i]) != f) out.push_back(i);
    return out;
}

FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold needs k >= 2");
    auto cls = by_class(labels);
    for (std::size_t c = 0; c < 2; ++c)
        if (cls[c].size() < k)
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(cls[c].size()) +
                            " members, fewer than k = " + std::to_string(k));
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(labels.size(), -1);
    std::size_t next = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        Rng rng(derive_seed(seed, 100 + c));
        rng.shuffle(cls[c]);
        for (std::size_t idx : cls[c]) {
            plan.fold_of[idx] = static_cast<int>(next);
            next = (next + 1) % k;
        }
    }
    return plan;
}

}  // namespace szbp::eval
