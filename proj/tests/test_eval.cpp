#include "support.hpp"
#include "szbp/eval.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace szbp;
using namespace szbp::eval;

namespace {

std::vector<int> class_labels(std::size_t n_pos, std::size_t n_neg) {
    std::vector<int> y(n_pos, 1);
    y.insert(y.end(), n_neg, 0);
    return y;
}

std::size_t count_pos(const std::vector<std::size_t>& idx, const std::vector<int>& y) {
    return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](auto i) { return y[i] == 1; }));
}

}  // namespace

TEST_SUITE("eval") {
    TEST_CASE("auc examples") {
        CHECK(auc(std::vector<double>{0.9, 0.8, 0.3, 0.2}, std::vector<int>{1, 1, 0, 0}) == 1.0);
        CHECK(auc(std::vector<double>{0.9, 0.2, 0.8, 0.3}, std::vector<int>{1, 0, 0, 1}) == 0.75);
        CHECK(auc(std::vector<double>(6, 0.4), std::vector<int>{1, 0, 1, 0, 0, 1}) == 0.5);
    }

    TEST_CASE("auc rejects single-class labels and non-finite scores") {
        CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DataError);
        CHECK_THROWS_AS(auc(std::vector<double>{NAN, 0.2}, std::vector<int>{1, 0}), NumericError);
    }

    TEST_CASE("property: rank AUC equals pair counting and the complement law holds") {
        Rng rng(1);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n = 2 + rng.below(49);
            std::vector<double> s(n);
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = static_cast<double>(rng.below(8)) / 4.0;  // plenty of ties
                y[i] = static_cast<int>(rng.below(2));
            }
            y[0] = 1, y[1] = 0;
            const double a = auc(s, y);
            CHECK(a == testing::auc_pairs(s, y));
            std::vector<int> flipped(n);
            for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
            CHECK(a + auc(s, flipped) == 1.0);
        }
    }

    TEST_CASE("property: strictly increasing transforms leave AUC unchanged") {
        Rng rng(2);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 4 + rng.below(40);
            std::vector<double> s(n), t(n);
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = rng.normal();
                y[i] = static_cast<int>(i % 2);
            }
            const double a = 0.1 + rng.uniform(), b = rng.normal();
            for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(a * s[i]) + b;
            CHECK(auc(s, y) == auc(t, y));
        }
    }

    TEST_CASE("stratified split: exact proportions and determinism") {
        const auto y = class_labels(50, 50);
        const auto sp = stratified_split(y, 0.2, 9);
        CHECK(sp.holdout.size() == 20);
        CHECK(count_pos(sp.holdout, y) == 10);
        CHECK(sp.train.size() == 80);
        CHECK(std::is_sorted(sp.holdout.begin(), sp.holdout.end()));
        const auto again = stratified_split(y, 0.2, 9);
        CHECK(again.train == sp.train);
        CHECK(again.holdout == sp.holdout);
        CHECK(stratified_split(y, 0.2, 10).holdout != sp.holdout);
    }

    TEST_CASE("stratified split: 236/235 cohort rounds per class") {
        const auto y = class_labels(236, 235);
        const auto sp = stratified_split(y, 0.2, 3);
        CHECK((sp.holdout.size() == 94 || sp.holdout.size() == 95));
        CHECK(std::abs(static_cast<double>(count_pos(sp.holdout, y)) - 0.2 * 236) <= 1.0);
        CHECK(std::abs(static_cast<double>(sp.holdout.size() - count_pos(sp.holdout, y)) - 0.2 * 235) <= 1.0);
    }

    TEST_CASE("stratified split: classes too small are rejected") {
        CHECK_THROWS_AS(stratified_split(class_labels(1, 10), 0.2, 1), DataError);
        CHECK_THROWS_AS(stratified_split(class_labels(5, 5), 1.0, 1), ConfigError);
    }

    TEST_CASE("k-fold: 25/25 into 5 folds of 10") {
        const auto y = class_labels(25, 25);
        const auto plan = stratified_kfold(y, 5, 4);
        for (std::size_t f = 0; f < 5; ++f) {
            const auto m = plan.members(f);
            CHECK(m.size() == 10);
            CHECK(count_pos(m, y) == 5);
        }
    }

    TEST_CASE("k-fold: 6/5 gives fold sizes {3,2,2,2,2}") {
        const auto plan = stratified_kfold(class_labels(6, 5), 5, 4);
        std::multiset<std::size_t> sizes;
        for (std::size_t f = 0; f < 5; ++f) sizes.insert(plan.members(f).size());
        CHECK(sizes == std::multiset<std::size_t>{3, 2, 2, 2, 2});
    }

    TEST_CASE("k-fold: degenerate requests fail") {
        CHECK_THROWS_AS(stratified_kfold(class_labels(5, 5), 1, 0), ConfigError);
        CHECK_THROWS_AS(stratified_kfold(class_labels(4, 10), 5, 0), DataError);
    }

    TEST_CASE("property: folds partition the indices with balanced classes") {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t k = 2 + rng.below(5);
            const std::size_t n_pos = k + rng.below(30), n_neg = k + rng.below(30);
            auto y = class_labels(n_pos, n_neg);
            rng.shuffle(y);
            const auto plan = stratified_kfold(y, k, rng.next());
            std::vector<int> seen(y.size(), 0);
            std::size_t lo = y.size(), hi = 0;
            for (std::size_t f = 0; f < k; ++f) {
                const auto m = plan.members(f);
                for (auto i : m) ++seen[i];
                lo = std::min(lo, m.size());
                hi = std::max(hi, m.size());
                const double expect = static_cast<double>(n_pos) / static_cast<double>(k);
                CHECK(std::abs(static_cast<double>(count_pos(m, y)) - expect) < 1.0 + 1e-12);
                const auto comp = plan.complement(f);
                CHECK(comp.size() + m.size() == y.size());
            }
            CHECK(hi - lo <= 1);
            CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        }
    }
}
