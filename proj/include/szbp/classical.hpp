#pragma once

// Classical binary classifiers producing soft scores for AUC, and grid
// search over hyperparameters with stratified k-fold cross-validation.

#include "szbp/artifact.hpp"
#include "szbp/core.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace szbp::classical {

enum class Algorithm { LR, SVM, LDA, GNB, KNN, DT, RF };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::LR,  Algorithm::SVM, Algorithm::LDA, Algorithm::GNB,
                                               Algorithm::KNN, Algorithm::DT,  Algorithm::RF};

/// Hyperparameters by name. Keys per algorithm:
///   LR  l2, max_iter, tol          SVM C, max_iter
///   LDA ridge                      GNB var_floor
///   KNN k                          DT  max_depth (0 = unlimited), min_samples_leaf, max_features (0 = all)
///   RF  n_trees, max_depth, min_samples_leaf, max_features (0 = sqrt d), bootstrap
using Hyperparameters = std::map<std::string, double>;

struct ClassifierSpec {
    Algorithm algorithm = Algorithm::LDA;
    Hyperparameters hp;  ///< missing keys take defaults
};

/// Defaults for every key of the algorithm.
Hyperparameters default_hyperparameters(Algorithm a);
/// Default search grid, in documented order.
std::vector<Hyperparameters> default_grid(Algorithm a);
/// Spec with all defaults filled in; throws ConfigError on unknown keys or bad values.
ClassifierSpec resolve(const ClassifierSpec& spec);

/// w.x + b, scored through the logistic function (LR, SVM, LDA).
struct LinearModel {
    std::vector<double> w;
    double b = 0.0;
};

struct GaussianNB {
    std::vector<double> mean[2];
    std::vector<double> var[2];
    double log_prior[2] = {0.0, 0.0};

    /// P(class 0 | x), P(class 1 | x).
    std::pair<double, double> posteriors(std::span<const double> x) const;
};

struct KnnModel {
    Matrix X;
    std::vector<int> y;
    std::size_t k = 5;
};

/// Flattened binary tree. Leaves have feature = -1 and value = positive fraction.
struct TreeModel {
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double score(std::span<const double> x) const;
    std::size_t depth() const;
};

struct ForestModel {
    std::vector<TreeModel> trees;
};

class TrainedClassifier {
public:
    using Model = std::variant<LinearModel, GaussianNB, KnnModel, TreeModel, ForestModel>;

    TrainedClassifier(ClassifierSpec spec, std::size_t dim, Model model)
        : spec_(std::move(spec)), dim_(dim), model_(std::move(model)) {}

    const ClassifierSpec& spec() const { return spec_; }
    std::size_t dim() const { return dim_; }
    const Model& model() const { return model_; }

    /// Learned parameters as named arrays, for persistence.
    std::vector<NamedArray> parameters() const;
    static TrainedClassifier from_parameters(const ClassifierSpec& spec, std::size_t dim,
                                             const std::vector<NamedArray>& arrays);

private:
    ClassifierSpec spec_;
    std::size_t dim_;
    Model model_;
};

/// Fits the classifier. y holds 0/1 labels; both classes must be present.
TrainedClassifier fit(const ClassifierSpec& spec, const Matrix& X, std::span<const int> y, std::uint64_t seed);

/// One confidence score in [0, 1] per row of X.
std::vector<double> predict_scores(const TrainedClassifier& model, const Matrix& X);

struct GridPointResult {
    Hyperparameters hp;
    std::vector<double> fold_auc;
    double mean_auc = 0.0;
};

struct GridSearchResult {
    std::vector<GridPointResult> points;  ///< in grid order
    std::size_t best = 0;
    TrainedClassifier model;  ///< refit on all rows with the best point
};

/// Mean validation AUC per grid point over stratified folds; the best point
/// (first on ties) is refit on the full data.
GridSearchResult grid_search_cv(Algorithm algorithm, const std::vector<Hyperparameters>& grid, const Matrix& X,
                                std::span<const int> y, std::size_t folds, std::uint64_t seed);

}  // namespace szbp::classical
