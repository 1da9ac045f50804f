#include "szbp/classical.hpp"

#include "classical_trees.hpp"
#include "szbp/eval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace szbp::classical {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> column_means(const Matrix& X) {
    std::vector<double> mu(X.cols(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) mu[j] += X(i, j);
    for (double& m : mu) m /= static_cast<double>(X.rows());
    return mu;
}

Matrix centred(const Matrix& X, std::span<const double> mu) {
    Matrix out = X;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) -= mu[j];
    return out;
}

// Moves a model fitted on centred data back to raw coordinates.
LinearModel uncentre(std::vector<double> w, double b, std::span<const double> mu) {
    const double bias = b - dot(w, mu);
    return {std::move(w), bias};
}

std::size_t hp_count(const Hyperparameters& hp, const std::string& key) {
    return static_cast<std::size_t>(std::llround(hp.at(key)));
}

// ---------------------------------------------------------------- LR

LinearModel fit_logistic(const Matrix& X, std::span<const int> y, const Hyperparameters& hp) {
    const std::size_t n = X.rows(), d = X.cols();
    const double lambda = hp.at("l2");
    const std::size_t max_iter = hp_count(hp, "max_iter");
    const double tol = hp.at("tol");
    const auto mu = column_means(X);
    const Matrix Xc = centred(X, mu);
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> w(d, 0.0), gw(d), w_try(d), z(n);
    double b = 0.0;

    auto objective = [&](std::span<const double> ww, double bb) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = dot(Xc.row(i), ww) + bb;
            f += softplus(zi) - y[i] * zi;
        }
        return f * inv_n + 0.5 * lambda * dot(ww, ww);
    };

    double step = 1.0;
    double f = objective(w, b);
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (sigmoid(dot(Xc.row(i), w) + b) - y[i]) * inv_n;
            gb += r;
            auto xi = Xc.row(i);
            for (std::size_t j = 0; j < d; ++j) gw[j] += r * xi[j];
        }
        for (std::size_t j = 0; j < d; ++j) gw[j] += lambda * w[j];
        const double gnorm2 = dot(gw, gw) + gb * gb;
        if (std::sqrt(gnorm2) < tol) break;

        // Armijo backtracking from twice the last accepted step.
        double t = step * 2.0;
        double f_try = 0.0;
        for (;;) {
            for (std::size_t j = 0; j < d; ++j) w_try[j] = w[j] - t * gw[j];
            f_try = objective(w_try, b - t * gb);
            if (f_try <= f - 0.5 * t * gnorm2 || t < 1e-16) break;
            t *= 0.5;
        }
        if (!(f_try < f)) break;
        w.swap(w_try);
        b -= t * gb;
        f = f_try;
        step = t;
    }
    return uncentre(std::move(w), b, mu);
}

// ---------------------------------------------------------------- SVM

// Deterministic full-batch Pegasos on (lambda/2)|w|^2 + mean hinge with
// lambda = 1 / (C n); the bias rides along as a constant feature.
LinearModel fit_svm(const Matrix& X, std::span<const int> y, const Hyperparameters& hp) {
    const std::size_t n = X.rows(), d = X.cols();
    const double c = hp.at("C");
    const std::size_t max_iter = hp_count(hp, "max_iter");
    const double lambda = 1.0 / (c * static_cast<double>(n));
    const auto mu = column_means(X);
    const Matrix Xc = centred(X, mu);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double radius = 1.0 / std::sqrt(lambda);

    std::vector<double> w(d, 0.0), g(d), best_w = w;
    double b = 0.0, best_b = 0.0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 1; t <= max_iter + 1; ++t) {
        std::fill(g.begin(), g.end(), 0.0);
        double gb = 0.0, hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double yi = y[i] ? 1.0 : -1.0;
            const double margin = yi * (dot(Xc.row(i), w) + b);
            if (margin < 1.0) {
                hinge += 1.0 - margin;
                auto xi = Xc.row(i);
                for (std::size_t j = 0; j < d; ++j) g[j] -= yi * xi[j] * inv_n;
                gb -= yi * inv_n;
            }
        }
        const double obj = 0.5 * lambda * (dot(w, w) + b * b) + hinge * inv_n;
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
            best_b = b;
        }
        if (t > max_iter) break;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        for (std::size_t j = 0; j < d; ++j) w[j] -= eta * (g[j] + lambda * w[j]);
        b -= eta * (gb + lambda * b);
        const double norm = std::sqrt(dot(w, w) + b * b);
        if (norm > radius) {
            const double s = radius / norm;
            for (double& v : w) v *= s;
            b *= s;
        }
    }
    return uncentre(std::move(best_w), best_b, mu);
}

// ---------------------------------------------------------------- LDA

// Pooled within-class covariance S plus ridge * (tr S / d) * I. When d > n
// the solve goes through the Woodbury identity on an n x n system.
LinearModel fit_lda(const Matrix& X, std::span<const int> y, const Hyperparameters& hp) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const std::size_t n = X.rows(), d = X.cols();
    const double ridge = hp.at("ridge");

    VectorXd mean[2] = {VectorXd::Zero(static_cast<Eigen::Index>(d)), VectorXd::Zero(static_cast<Eigen::Index>(d))};
    double count[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        count[c] += 1.0;
        for (std::size_t j = 0; j < d; ++j) mean[c](static_cast<Eigen::Index>(j)) += X(i, j);
    }
    mean[0] /= count[0];
    mean[1] /= count[1];

    const double dof = std::max(1.0, static_cast<double>(n) - 2.0);
    MatrixXd U(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (X(i, j) - mean[y[i]](static_cast<Eigen::Index>(j))) / std::sqrt(dof);

    const double trace = U.squaredNorm();
    if (!(trace > 0.0)) throw NumericError("LDA: within-class scatter is zero");
    const double alpha = ridge * trace / static_cast<double>(d);
    const VectorXd delta = mean[1] - mean[0];

    VectorXd w;
    if (d <= n) {
        MatrixXd S = U.transpose() * U;
        S.diagonal().array() += alpha;
        Eigen::LLT<MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) throw NumericError("LDA: covariance is not positive definite");
        w = llt.solve(delta);
    } else {
        MatrixXd K = U * U.transpose();
        K.diagonal().array() += alpha;
        Eigen::LLT<MatrixXd> llt(K);
        if (llt.info() != Eigen::Success) throw NumericError("LDA: Gram system is not positive definite");
        w = (delta - U.transpose() * llt.solve(U * delta)) / alpha;
    }
    if (!w.allFinite()) throw NumericError("LDA: non-finite discriminant");

    LinearModel m;
    m.w.assign(w.data(), w.data() + w.size());
    const VectorXd mid = 0.5 * (mean[0] + mean[1]);
    m.b = -w.dot(mid) + std::log(count[1] / count[0]);
    return m;
}

// ---------------------------------------------------------------- GNB

GaussianNB fit_gnb(const Matrix& X, std::span<const int> y, const Hyperparameters& hp) {
    const std::size_t n = X.rows(), d = X.cols();
    const double floor = hp.at("var_floor");
    GaussianNB m;
    double count[2] = {0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(d, 0.0);
        m.var[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int c = y[i];
        count[c] += 1.0;
        for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += X(i, j);
    }
    for (int c = 0; c < 2; ++c)
        for (double& v : m.mean[c]) v /= count[c];
    for (std::size_t i = 0; i < n; ++i) {
        const int c = y[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = X(i, j) - m.mean[c][j];
            m.var[c][j] += dv * dv;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (double& v : m.var[c]) v = std::max(v / count[c], floor);
        m.log_prior[c] = std::log(count[c] / static_cast<double>(n));
    }
    return m;
}

template <typename T>
const T& as(const TrainedClassifier::Model& m) {
    return std::get<T>(m);
}

void check_training_data(const Matrix& X, std::span<const int> y) {
    if (X.rows() != y.size()) throw ConfigError("label count does not match rows");
    if (X.rows() < 2 || X.cols() < 1) throw DataError("need at least 2 rows and 1 feature to fit");
    std::size_t pos = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw ConfigError("labels must be 0/1");
        pos += static_cast<std::size_t>(v);
    }
    if (pos == 0 || pos == y.size()) throw DataError("training labels contain a single class");
    for (double v : X.values())
        if (!std::isfinite(v)) throw DataError("training data contains a non-finite value");
}

detail::TreeParams tree_params(const Hyperparameters& hp, std::size_t d, bool forest) {
    detail::TreeParams p;
    p.max_depth = static_cast<int>(std::llround(hp.at("max_depth")));
    p.min_samples_leaf = hp_count(hp, "min_samples_leaf");
    p.max_features = hp_count(hp, "max_features");
    if (forest && p.max_features == 0)
        p.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    return p;
}

NamedArray vec_array(const std::string& name, const std::vector<double>& v) { return {name, {v.size()}, v}; }

std::vector<double> checked(const NamedArray& a, std::size_t n) {
    if (a.data.size() != n)
        throw FeatureMismatchError("parameter '" + a.name + "' has " + std::to_string(a.data.size()) +
                                   " values, expected " + std::to_string(n));
    return a.data;
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::LR: return "LR";
        case Algorithm::SVM: return "SVM";
        case Algorithm::LDA: return "LDA";
        case Algorithm::GNB: return "GNB";
        case Algorithm::KNN: return "KNN";
        case Algorithm::DT: return "DT";
        case Algorithm::RF: return "RF";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& s) {
    for (auto a : kAllAlgorithms)
        if (to_string(a) == s) return a;
    throw ConfigError("unknown classical algorithm '" + s + "'");
}

Hyperparameters default_hyperparameters(Algorithm a) {
    switch (a) {
        case Algorithm::LR: return {{"l2", 1.0}, {"max_iter", 5000}, {"tol", 1e-6}};
        case Algorithm::SVM: return {{"C", 1.0}, {"max_iter", 1000}};
        case Algorithm::LDA: return {{"ridge", 1e-3}};
        case Algorithm::GNB: return {{"var_floor", 1e-9}};
        case Algorithm::KNN: return {{"k", 5}};
        case Algorithm::DT: return {{"max_depth", 0}, {"min_samples_leaf", 1}, {"max_features", 0}};
        case Algorithm::RF:
            return {{"n_trees", 100}, {"max_depth", 8}, {"min_samples_leaf", 1}, {"max_features", 0}, {"bootstrap", 1}};
    }
    return {};
}

std::vector<Hyperparameters> default_grid(Algorithm a) {
    std::vector<Hyperparameters> g;
    switch (a) {
        case Algorithm::LR:
            for (double v : {0.01, 0.1, 1.0, 10.0}) g.push_back({{"l2", v}});
            break;
        case Algorithm::SVM:
            for (double v : {0.01, 0.1, 1.0, 10.0}) g.push_back({{"C", v}});
            break;
        case Algorithm::LDA:
            for (double v : {1e-6, 1e-3, 1e-1}) g.push_back({{"ridge", v}});
            break;
        case Algorithm::GNB:
            for (double v : {1e-9, 1e-6}) g.push_back({{"var_floor", v}});
            break;
        case Algorithm::KNN:
            for (double v : {3, 5, 7, 11}) g.push_back({{"k", v}});
            break;
        case Algorithm::DT:
            for (double v : {2, 4, 8, 0}) g.push_back({{"max_depth", v}});
            break;
        case Algorithm::RF:
            for (double t : {50, 100, 200})
                for (double dpt : {4, 8}) g.push_back({{"n_trees", t}, {"max_depth", dpt}});
            break;
    }
    return g;
}

ClassifierSpec resolve(const ClassifierSpec& spec) {
    ClassifierSpec out{spec.algorithm, default_hyperparameters(spec.algorithm)};
    for (const auto& [k, v] : spec.hp) {
        if (!out.hp.contains(k))
            throw ConfigError("hyperparameter '" + k + "' is not valid for " + to_string(spec.algorithm));
        if (!std::isfinite(v)) throw ConfigError("hyperparameter '" + k + "' must be finite");
        out.hp[k] = v;
    }
    const auto& h = out.hp;
    auto positive = [&](const char* k) {
        if (!(h.at(k) > 0.0)) throw ConfigError(std::string("hyperparameter '") + k + "' must be positive");
    };
    auto non_negative = [&](const char* k) {
        if (h.at(k) < 0.0) throw ConfigError(std::string("hyperparameter '") + k + "' must be >= 0");
    };
    switch (spec.algorithm) {
        case Algorithm::LR: non_negative("l2"); positive("max_iter"); positive("tol"); break;
        case Algorithm::SVM: positive("C"); positive("max_iter"); break;
        case Algorithm::LDA: positive("ridge"); break;
        case Algorithm::GNB: positive("var_floor"); break;
        case Algorithm::KNN: positive("k"); break;
        case Algorithm::DT: non_negative("max_depth"); positive("min_samples_leaf"); non_negative("max_features"); break;
        case Algorithm::RF:
            positive("n_trees"); non_negative("max_depth"); positive("min_samples_leaf"); non_negative("max_features");
            break;
    }
    return out;
}

std::pair<double, double> GaussianNB::posteriors(std::span<const double> x) const {
    double ll[2];
    for (int c = 0; c < 2; ++c) {
        double s = log_prior[c];
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double dv = x[j] - mean[c][j];
            s -= 0.5 * (std::log(2.0 * std::numbers::pi * var[c][j]) + dv * dv / var[c][j]);
        }
        ll[c] = s;
    }
    return {sigmoid(ll[0] - ll[1]), sigmoid(ll[1] - ll[0])};
}

TrainedClassifier fit(const ClassifierSpec& spec_in, const Matrix& X, std::span<const int> y, std::uint64_t seed) {
    const ClassifierSpec spec = resolve(spec_in);
    check_training_data(X, y);
    const std::size_t d = X.cols();
    const auto& hp = spec.hp;
    switch (spec.algorithm) {
        case Algorithm::LR: return {spec, d, fit_logistic(X, y, hp)};
        case Algorithm::SVM: return {spec, d, fit_svm(X, y, hp)};
        case Algorithm::LDA: return {spec, d, fit_lda(X, y, hp)};
        case Algorithm::GNB: return {spec, d, fit_gnb(X, y, hp)};
        case Algorithm::KNN: return {spec, d, KnnModel{X, {y.begin(), y.end()}, hp_count(hp, "k")}};
        case Algorithm::DT: {
            std::vector<std::size_t> rows(X.rows());
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            Rng rng(derive_seed(seed, 0));
            return {spec, d, detail::build_tree(X, y, std::move(rows), tree_params(hp, d, false), rng)};
        }
        case Algorithm::RF: {
            const std::size_t n_trees = hp_count(hp, "n_trees");
            const bool bootstrap = hp.at("bootstrap") != 0.0;
            const auto params = tree_params(hp, d, true);
            ForestModel forest;
            for (std::size_t t = 0; t < n_trees; ++t) {
                Rng rng(derive_seed(seed, t));
                std::vector<std::size_t> rows(X.rows());
                if (bootstrap)
                    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(X.rows()));
                else
                    std::iota(rows.begin(), rows.end(), std::size_t{0});
                forest.trees.push_back(detail::build_tree(X, y, std::move(rows), params, rng));
            }
            return {spec, d, std::move(forest)};
        }
    }
    throw ConfigError("unsupported algorithm");
}

std::vector<double> predict_scores(const TrainedClassifier& model, const Matrix& X) {
    if (X.cols() != model.dim())
        throw FeatureMismatchError("model expects " + std::to_string(model.dim()) + " features, got " +
                                   std::to_string(X.cols()));
    std::vector<double> out(X.rows());
    const auto& m = model.model();
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto x = X.row(i);
        if (const auto* lin = std::get_if<LinearModel>(&m)) {
            out[i] = sigmoid(dot(lin->w, x) + lin->b);
        } else if (const auto* nb = std::get_if<GaussianNB>(&m)) {
            out[i] = nb->posteriors(x).second;
        } else if (const auto* knn = std::get_if<KnnModel>(&m)) {
            const std::size_t n = knn->X.rows();
            std::vector<std::pair<double, std::size_t>> dist(n);
            for (std::size_t r = 0; r < n; ++r) {
                const auto t = knn->X.row(r);
                double s = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - t[j]) * (x[j] - t[j]);
                dist[r] = {s, r};
            }
            const std::size_t k = std::min(knn->k, n);
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            double pos = 0.0;
            for (std::size_t r = 0; r < k; ++r) pos += knn->y[dist[r].second];
            out[i] = pos / static_cast<double>(k);
        } else if (const auto* tree = std::get_if<TreeModel>(&m)) {
            out[i] = tree->score(x);
        } else {
            const auto& forest = std::get<ForestModel>(m);
            double s = 0.0;
            for (const auto& t : forest.trees) s += t.score(x);
            out[i] = s / static_cast<double>(forest.trees.size());
        }
    }
    return out;
}

std::vector<NamedArray> TrainedClassifier::parameters() const {
    std::vector<NamedArray> out;
    if (const auto* lin = std::get_if<LinearModel>(&model_)) {
        out.push_back(vec_array("w", lin->w));
        out.push_back({"b", {1}, {lin->b}});
    } else if (const auto* nb = std::get_if<GaussianNB>(&model_)) {
        for (int c = 0; c < 2; ++c) {
            out.push_back(vec_array("mean" + std::to_string(c), nb->mean[c]));
            out.push_back(vec_array("var" + std::to_string(c), nb->var[c]));
        }
        out.push_back({"log_prior", {2}, {nb->log_prior[0], nb->log_prior[1]}});
    } else if (const auto* knn = std::get_if<KnnModel>(&model_)) {
        out.push_back({"X", {knn->X.rows(), knn->X.cols()}, knn->X.values()});
        out.push_back({"y", {knn->y.size()}, std::vector<double>(knn->y.begin(), knn->y.end())});
    } else if (const auto* tree = std::get_if<TreeModel>(&model_)) {
        out = detail::tree_arrays(*tree, "");
    } else {
        const auto& forest = std::get<ForestModel>(model_);
        for (std::size_t t = 0; t < forest.trees.size(); ++t) {
            auto arrays = detail::tree_arrays(forest.trees[t], "tree" + std::to_string(t) + ".");
            out.insert(out.end(), arrays.begin(), arrays.end());
        }
    }
    return out;
}

TrainedClassifier TrainedClassifier::from_parameters(const ClassifierSpec& spec_in, std::size_t dim,
                                                     const std::vector<NamedArray>& arrays) {
    const ClassifierSpec spec = resolve(spec_in);
    auto check_tree = [&](const TreeModel& t) {
        for (const auto& nd : t.nodes)
            if (nd.feature >= static_cast<int>(dim)) throw DataError("tree references a feature beyond the model dimension");
    };
    switch (spec.algorithm) {
        case Algorithm::LR:
        case Algorithm::SVM:
        case Algorithm::LDA: {
            LinearModel m{checked(find_array(arrays, "w"), dim), checked(find_array(arrays, "b"), 1)[0]};
            return {spec, dim, std::move(m)};
        }
        case Algorithm::GNB: {
            GaussianNB m;
            for (int c = 0; c < 2; ++c) {
                m.mean[c] = checked(find_array(arrays, "mean" + std::to_string(c)), dim);
                m.var[c] = checked(find_array(arrays, "var" + std::to_string(c)), dim);
            }
            const auto lp = checked(find_array(arrays, "log_prior"), 2);
            m.log_prior[0] = lp[0];
            m.log_prior[1] = lp[1];
            return {spec, dim, std::move(m)};
        }
        case Algorithm::KNN: {
            const auto& xa = find_array(arrays, "X");
            const auto& ya = find_array(arrays, "y");
            if (xa.shape.size() != 2 || xa.shape[1] != dim || xa.shape[0] != ya.data.size() ||
                xa.data.size() != xa.shape[0] * xa.shape[1])
                throw FeatureMismatchError("KNN reference set does not match the model dimension");
            KnnModel m;
            m.X = Matrix(xa.shape[0], xa.shape[1]);
            m.X.values() = xa.data;
            for (double v : ya.data) m.y.push_back(static_cast<int>(v));
            m.k = hp_count(spec.hp, "k");
            return {spec, dim, std::move(m)};
        }
        case Algorithm::DT: {
            auto t = detail::tree_from_arrays(arrays, "");
            check_tree(t);
            return {spec, dim, std::move(t)};
        }
        case Algorithm::RF: {
            ForestModel f;
            const std::size_t n_trees = hp_count(spec.hp, "n_trees");
            for (std::size_t t = 0; t < n_trees; ++t) {
                f.trees.push_back(detail::tree_from_arrays(arrays, "tree" + std::to_string(t) + "."));
                check_tree(f.trees.back());
            }
            return {spec, dim, std::move(f)};
        }
    }
    throw ConfigError("unsupported algorithm");
}

GridSearchResult grid_search_cv(Algorithm algorithm, const std::vector<Hyperparameters>& grid, const Matrix& X,
                                std::span<const int> y, std::size_t folds, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("grid search needs at least one grid point");
    if (X.rows() != y.size()) throw ConfigError("label count does not match rows");
    if (X.rows() < folds) throw DataError("fewer rows than folds");
    const auto plan = eval::stratified_kfold(y, folds, seed);

    std::vector<GridPointResult> points;
    for (const auto& hp : grid) {
        const ClassifierSpec spec = resolve({algorithm, hp});
        GridPointResult r;
        r.hp = spec.hp;
        for (std::size_t f = 0; f < folds; ++f) {
            const auto train = plan.complement(f);
            const auto val = plan.members(f);
            std::vector<int> ytr, yval;
            for (auto i : train) ytr.push_back(y[i]);
            for (auto i : val) yval.push_back(y[i]);
            const auto model = fit(spec, X.select_rows(train), ytr, seed);
            r.fold_auc.push_back(eval::auc(predict_scores(model, X.select_rows(val)), yval));
        }
        r.mean_auc = std::accumulate(r.fold_auc.begin(), r.fold_auc.end(), 0.0) / static_cast<double>(folds);
        points.push_back(std::move(r));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].mean_auc > points[best].mean_auc) best = i;
    auto model = fit({algorithm, points[best].hp}, X, y, seed);
    return {std::move(points), best, std::move(model)};
}

}  // namespace szbp::classical
