#include "support.hpp"
#include "szbp/classical.hpp"
#include "szbp/eval.hpp"

#include <doctest.h>

#include <algorithm>

using namespace szbp;
using namespace szbp::classical;

namespace {

struct Blobs {
    Matrix X;
    std::vector<int> y;
};

// Two isotropic Gaussians at -shift / +shift along `dir`.
Blobs blobs(std::size_t n, std::size_t d, double sep, std::uint64_t seed, std::vector<double> dir = {}) {
    Rng rng(seed);
    if (dir.empty()) {
        dir.assign(d, 0.0);
        dir[0] = 1.0;
    }
    Blobs b{Matrix(n, d), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        b.y[i] = static_cast<int>(i % 2);
        const double sign = b.y[i] ? 0.5 : -0.5;
        for (std::size_t j = 0; j < d; ++j) b.X(i, j) = rng.normal() + sign * sep * dir[j];
    }
    return b;
}

double train_auc(Algorithm a, const Blobs& b, Hyperparameters hp = {}) {
    const auto m = fit({a, hp}, b.X, b.y, 1);
    return eval::auc(predict_scores(m, b.X), b.y);
}

}  // namespace

TEST_SUITE("classical") {
    TEST_CASE("LDA separates two well-separated blobs") {
        CHECK(train_auc(Algorithm::LDA, blobs(200, 2, 6.0, 3)) >= 0.99);
    }

    TEST_CASE("GNB orders a sign-determined class perfectly") {
        Rng rng(4);
        Blobs b{Matrix(100, 3), std::vector<int>(100)};
        for (std::size_t i = 0; i < 100; ++i) {
            for (std::size_t j = 0; j < 3; ++j) b.X(i, j) = rng.normal();
            b.y[i] = b.X(i, 0) > 0.0;
        }
        CHECK(train_auc(Algorithm::GNB, b) == 1.0);
    }

    TEST_CASE("every algorithm rejects single-class labels, bad shapes and non-finite input") {
        const auto b = blobs(20, 3, 2.0, 5);
        const std::vector<int> ones(20, 1);
        for (auto a : kAllAlgorithms) {
            CAPTURE(to_string(a));
            CHECK_THROWS_AS(fit({a, {}}, b.X, ones, 0), DataError);
            Matrix bad = b.X;
            bad(3, 1) = NAN;
            CHECK_THROWS_AS(fit({a, {}}, bad, b.y, 0), DataError);
            const auto m = fit({a, {}}, b.X, b.y, 0);
            CHECK_THROWS_AS(predict_scores(m, Matrix(2, 4)), FeatureMismatchError);
        }
    }

    TEST_CASE("scores lie in [0, 1] for every algorithm") {
        const auto b = blobs(60, 4, 1.5, 6);
        for (auto a : kAllAlgorithms) {
            const auto s = predict_scores(fit({a, {}}, b.X, b.y, 0), b.X);
            CHECK(std::all_of(s.begin(), s.end(), [](double v) { return v >= 0.0 && v <= 1.0; }));
        }
    }

    TEST_CASE("KNN with k = 1 scores its positive training rows 1") {
        const auto b = blobs(40, 3, 1.0, 7);
        const auto m = fit({Algorithm::KNN, {{"k", 1}}}, b.X, b.y, 0);
        const auto s = predict_scores(m, b.X);
        for (std::size_t i = 0; i < 40; ++i)
            if (b.y[i] == 1) CHECK(s[i] == 1.0);
    }

    TEST_CASE("zero-weight logistic model scores 0.5") {
        const TrainedClassifier m({Algorithm::LR, default_hyperparameters(Algorithm::LR)}, 3,
                                  LinearModel{{0.0, 0.0, 0.0}, 0.0});
        Rng rng(8);
        for (double s : predict_scores(m, testing::random_matrix(10, 3, rng))) CHECK(s == 0.5);
    }

    TEST_CASE("RF with one tree and no bootstrap equals DT with the same seed and limits") {
        const auto b = blobs(80, 9, 1.0, 9);
        const auto dt = fit({Algorithm::DT, {{"max_depth", 5}, {"max_features", 3}}}, b.X, b.y, 42);
        const auto rf = fit({Algorithm::RF, {{"n_trees", 1}, {"max_depth", 5}, {"max_features", 3}, {"bootstrap", 0}}},
                            b.X, b.y, 42);
        Rng rng(10);
        const auto probe = testing::random_matrix(200, 9, rng);
        CHECK(predict_scores(dt, probe) == predict_scores(rf, probe));
    }

    TEST_CASE("grid search: singleton grid equals plain cross-validation") {
        const auto b = blobs(50, 3, 1.0, 11);
        const Hyperparameters hp{{"ridge", 1e-3}};
        const auto gs = grid_search_cv(Algorithm::LDA, {hp}, b.X, b.y, 5, 77);
        CHECK(gs.best == 0);
        const auto plan = eval::stratified_kfold(b.y, 5, 77);
        double sum = 0.0;
        for (std::size_t f = 0; f < 5; ++f) {
            const auto tr = plan.complement(f), va = plan.members(f);
            std::vector<int> ytr, yva;
            for (auto i : tr) ytr.push_back(b.y[i]);
            for (auto i : va) yva.push_back(b.y[i]);
            const auto m = fit({Algorithm::LDA, hp}, b.X.select_rows(tr), ytr, 0);
            sum += eval::auc(predict_scores(m, b.X.select_rows(va)), yva);
        }
        CHECK(gs.points[0].mean_auc == doctest::Approx(sum / 5.0).epsilon(1e-12));
        CHECK(gs.model.dim() == 3);
    }

    TEST_CASE("grid search: KNN prefers k = 1 over k = 51 on separable points") {
        const auto b = blobs(60, 2, 8.0, 12);
        const auto gs = grid_search_cv(Algorithm::KNN, {{{"k", 1}}, {{"k", 51}}}, b.X, b.y, 5, 3);
        CHECK(gs.points[0].mean_auc > gs.points[1].mean_auc);
        CHECK(gs.best == 0);
    }

    TEST_CASE("grid search and fitting are deterministic per seed") {
        const auto b = blobs(60, 5, 1.0, 13);
        const auto a = grid_search_cv(Algorithm::RF, default_grid(Algorithm::RF), b.X, b.y, 5, 21);
        const auto c = grid_search_cv(Algorithm::RF, default_grid(Algorithm::RF), b.X, b.y, 5, 21);
        CHECK(a.best == c.best);
        for (std::size_t p = 0; p < a.points.size(); ++p) CHECK(a.points[p].fold_auc == c.points[p].fold_auc);
        CHECK(predict_scores(a.model, b.X) == predict_scores(c.model, b.X));
    }

    TEST_CASE("grid search: too few rows for the folds fails") {
        const auto b = blobs(8, 2, 1.0, 14);
        CHECK_THROWS_AS(grid_search_cv(Algorithm::LDA, default_grid(Algorithm::LDA), b.X, b.y, 5, 0), DataError);
    }

    TEST_CASE("property: positive score scaling leaves AUC unchanged") {
        const auto b = blobs(80, 3, 1.0, 15);
        for (auto a : kAllAlgorithms) {
            auto s = predict_scores(fit({a, {}}, b.X, b.y, 0), b.X);
            const double base = eval::auc(s, b.y);
            for (double& v : s) v *= 3.7;
            CHECK(eval::auc(s, b.y) == base);
        }
    }

    TEST_CASE("LDA direction lies within 10 degrees of the mean difference") {
        const std::vector<double> dir{0.6, -0.8, 0.0};
        const auto b = blobs(2000, 3, 2.0, 16, dir);
        const auto m = fit({Algorithm::LDA, {}}, b.X, b.y, 0);
        const auto& w = std::get<LinearModel>(m.model()).w;
        double dotp = 0.0, nw = 0.0;
        for (std::size_t j = 0; j < 3; ++j) dotp += w[j] * dir[j], nw += w[j] * w[j];
        CHECK(std::acos(dotp / std::sqrt(nw)) * 180.0 / std::numbers::pi < 10.0);
    }

    TEST_CASE("GNB posteriors lie in [0, 1] and sum to 1") {
        const auto b = blobs(100, 4, 1.0, 17);
        const auto m = fit({Algorithm::GNB, {}}, b.X, b.y, 0);
        const auto& g = std::get<GaussianNB>(m.model());
        Rng rng(18);
        const auto probe = testing::random_matrix(100, 4, rng);
        for (std::size_t i = 0; i < 100; ++i) {
            const auto [p0, p1] = g.posteriors(probe.row(i));
            CHECK(p0 >= 0.0);
            CHECK(p1 <= 1.0);
            CHECK(std::abs(p0 + p1 - 1.0) <= 1e-9);
        }
    }

    TEST_CASE("unlimited-depth DT fits conflict-free training data exactly") {
        const auto b = blobs(150, 4, 0.5, 19);
        const auto m = fit({Algorithm::DT, {{"max_depth", 0}, {"min_samples_leaf", 1}}}, b.X, b.y, 0);
        const auto s = predict_scores(m, b.X);
        for (std::size_t i = 0; i < 150; ++i) CHECK((s[i] > 0.5) == (b.y[i] == 1));
        CHECK(std::get<TreeModel>(m.model()).depth() > 0);
    }

    TEST_CASE("DT respects its depth limit") {
        const auto b = blobs(150, 4, 0.5, 20);
        for (int depth : {1, 2, 4}) {
            const auto m = fit({Algorithm::DT, {{"max_depth", depth}}}, b.X, b.y, 0);
            CHECK(std::get<TreeModel>(m.model()).depth() <= static_cast<std::size_t>(depth));
        }
    }

    TEST_CASE("LR and SVM learn the separating direction") {
        const auto b = blobs(200, 3, 3.0, 21);
        CHECK(train_auc(Algorithm::LR, b) >= 0.95);
        CHECK(train_auc(Algorithm::SVM, b) >= 0.95);
        CHECK(train_auc(Algorithm::RF, b) >= 0.95);
    }

    TEST_CASE("parameters round-trip to identical scores") {
        const auto b = blobs(60, 4, 1.0, 22);
        Rng rng(23);
        const auto probe = testing::random_matrix(30, 4, rng);
        for (auto a : kAllAlgorithms) {
            CAPTURE(to_string(a));
            const auto m = fit({a, {}}, b.X, b.y, 5);
            const auto back = TrainedClassifier::from_parameters(m.spec(), m.dim(), m.parameters());
            CHECK(predict_scores(back, probe) == predict_scores(m, probe));
        }
    }

    TEST_CASE("hyperparameters are validated") {
        CHECK_THROWS_AS(resolve({Algorithm::LDA, {{"k", 3}}}), ConfigError);
        CHECK_THROWS_AS(resolve({Algorithm::KNN, {{"k", 0}}}), ConfigError);
        CHECK_THROWS_AS(resolve({Algorithm::LR, {{"l2", -1}}}), ConfigError);
        CHECK_THROWS_AS(parse_algorithm("XGB"), ConfigError);
        CHECK(default_grid(Algorithm::RF).size() == 6);
        CHECK(default_grid(Algorithm::LR).size() == 4);
    }
}
