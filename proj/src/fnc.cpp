#include "szbp/fnc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace szbp::fnc {

namespace {

// Centres x and returns sqrt(sum of squares); zero for a constant vector.
double center(std::span<const double> x, std::vector<double>& out) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    out.resize(x.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] - mean;
        ss += out[i] * out[i];
    }
    return std::sqrt(ss);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ConfigError("pearson: inputs differ in length");
    if (x.size() < 2) throw ConfigError("pearson: need at least 2 samples");
    std::vector<double> cx, cy;
    const double nx = center(x, cx);
    const double ny = center(y, cy);
    if (nx == 0.0 || ny == 0.0) throw NumericError("pearson: constant input has zero variance");
    return clamp_unit(dot(cx, cy) / (nx * ny));
}

std::pair<std::size_t, std::size_t> pair_of(std::size_t index) {
    std::size_t i = 1;
    while (pair_index(i + 1, 0) <= index) ++i;
    return {i, index - pair_index(i, 0)};
}

std::vector<double> compute_fnc(const IcnMatrix& icn) {
    const std::size_t ch = icn.channels();
    const std::size_t len = icn.original_length;
    if (ch < 2) throw DataError("FNC needs at least 2 channels");
    if (len < 2) throw DataError("FNC needs at least 2 samples per channel");

    std::vector<std::vector<double>> centred(ch);
    std::vector<double> norms(ch);
    for (std::size_t c = 0; c < ch; ++c) {
        norms[c] = center(icn.data.row(c).first(len), centred[c]);
        if (norms[c] == 0.0) throw NumericError("FNC: channel " + std::to_string(c) + " is constant");
    }
    std::vector<double> out(fnc_length(ch));
    for (std::size_t i = 1; i < ch; ++i)
        for (std::size_t j = 0; j < i; ++j)
            out[pair_index(i, j)] = clamp_unit(dot(centred[i], centred[j]) / (norms[i] * norms[j]));
    return out;
}

FeatureTable make_table(Matrix X) {
    FeatureTable t;
    t.feature_ids.resize(X.cols());
    std::iota(t.feature_ids.begin(), t.feature_ids.end(), std::size_t{0});
    t.X = std::move(X);
    return t;
}

FeatureTable minmax_normalize_fit(const FeatureTable& table) {
    const Matrix& X = table.X;
    if (X.rows() == 0) throw DataError("cannot fit normalization on an empty table");
    std::vector<double> lo(X.cols()), hi(X.cols());
    for (std::size_t j = 0; j < X.cols(); ++j) {
        lo[j] = hi[j] = X(0, j);
        for (std::size_t i = 1; i < X.rows(); ++i) {
            lo[j] = std::min(lo[j], X(i, j));
            hi[j] = std::max(hi[j], X(i, j));
        }
    }
    return minmax_apply(lo, hi, table);
}

FeatureTable minmax_apply(std::span<const double> lo, std::span<const double> hi, const FeatureTable& table) {
    if (lo.size() != table.X.cols() || hi.size() != table.X.cols())
        throw FeatureMismatchError("normalization bounds cover " + std::to_string(lo.size()) +
                                   " features, table has " + std::to_string(table.X.cols()));
    FeatureTable out = table;
    out.lo.assign(lo.begin(), lo.end());
    out.hi.assign(hi.begin(), hi.end());
    for (std::size_t i = 0; i < out.X.rows(); ++i)
        for (std::size_t j = 0; j < out.X.cols(); ++j) {
            const double range = hi[j] - lo[j];
            double& v = out.X(i, j);
            v = range > 0.0 ? std::clamp((v - lo[j]) / range, 0.0, 1.0) : 0.0;
        }
    return out;
}

std::vector<double> chi2_scores(const Matrix& X, std::span<const int> y) {
    if (X.rows() != y.size()) throw ConfigError("chi2: label count does not match rows");
    std::size_t n1 = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw ConfigError("chi2: labels must be 0/1");
        n1 += static_cast<std::size_t>(v);
    }
    const std::size_t n = y.size();
    if (n1 == 0 || n1 == n) throw DataError("chi2: both classes must be present");
    const double p1 = static_cast<double>(n1) / static_cast<double>(n);
    const double p0 = 1.0 - p1;

    std::vector<double> scores(X.cols(), 0.0);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        double o0 = 0.0, o1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) (y[i] ? o1 : o0) += X(i, j);
        const double total = o0 + o1;
        if (total <= 0.0) continue;
        const double e0 = p0 * total, e1 = p1 * total;
        scores[j] = (o0 - e0) * (o0 - e0) / e0 + (o1 - e1) * (o1 - e1) / e1;
    }
    return scores;
}

SelectionResult select_top_k(std::span<const double> scores, std::size_t k) {
    if (k < 1 || k > scores.size())
        throw ConfigError("top-k: k = " + std::to_string(k) + " outside [1, " + std::to_string(scores.size()) + "]");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(k);
    return {std::vector<double>(scores.begin(), scores.end()), std::move(idx)};
}

}  // namespace szbp::fnc
