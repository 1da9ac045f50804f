#include "szbp/neural.hpp"

#include "szbp/core.hpp"
#include "szbp/eval.hpp"
#include "szbp/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace szbp::neural {

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)), data(volume(shape), fill) {}

std::size_t volume(const Shape& s) {
    std::size_t v = 1;
    for (auto d : s) v *= d;
    return v;
}

std::string shape_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ']';
    return os.str();
}

double bce(double p, int y) {
    const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return y ? -std::log(q) : -std::log(1.0 - q);
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Valid output range for an input offset `shift` on an axis of length n.
inline std::pair<std::ptrdiff_t, std::ptrdiff_t> valid_range(std::ptrdiff_t n, std::ptrdiff_t shift) {
    return {std::max<std::ptrdiff_t>(0, -shift), std::min<std::ptrdiff_t>(n, n - shift)};
}

// ---------------------------------------------------------------- Conv1D
// Lowered to a matrix product over the (in * kernel) x L patch matrix.

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMat patches(const Tensor& in, std::size_t K) {
    const std::size_t C = in.shape[0], L = in.shape[1];
    const auto pad = static_cast<std::ptrdiff_t>((K - 1) / 2);
    RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(C * K), static_cast<Eigen::Index>(L));
    for (std::size_t i = 0; i < C; ++i) {
        const double* irow = in.data.data() + i * L;
        for (std::size_t k = 0; k < K; ++k) {
            double* crow = cols.data() + (i * K + k) * L;
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
            const auto [t0, t1] = valid_range(static_cast<std::ptrdiff_t>(L), shift);
            for (std::ptrdiff_t t = t0; t < t1; ++t) crow[t] = irow[t + shift];
        }
    }
    return cols;
}

// Operands are copied into Eigen-owned storage: Eigen picks its vectorized
// paths from the runtime address of mapped memory, which would make the
// rounding depend on where std::vector happened to allocate.
RowMat weights(const Conv1D& l) {
    return Eigen::Map<const RowMat>(l.params.data(), static_cast<Eigen::Index>(l.out),
                                    static_cast<Eigen::Index>(l.in * l.kernel));
}

void layer_forward(const Conv1D& l, const Tensor& in, Tensor& out) {
    const std::size_t O = l.out, L = in.shape[1];
    const RowMat Y = weights(l) * patches(in, l.kernel);
    const double* B = l.params.data() + O * l.in * l.kernel;
    out = Tensor({O, L});
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t t = 0; t < L; ++t) out.data[o * L + t] = Y(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(t)) + B[o];
}

void layer_backward(const Conv1D& l, const Tensor& in, const Tensor& g, Tensor* gin, double* gp) {
    const std::size_t C = l.in, K = l.kernel, L = in.shape[1], O = l.out;
    const RowMat G = Eigen::Map<const RowMat>(g.data.data(), static_cast<Eigen::Index>(O), static_cast<Eigen::Index>(L));
    const RowMat gW = G * patches(in, K).transpose();
    for (std::size_t k = 0; k < O * C * K; ++k) gp[k] += gW.data()[k];
    double* gB = gp + O * C * K;
    for (std::size_t o = 0; o < O; ++o) {
        double acc = 0.0;
        for (std::size_t t = 0; t < L; ++t) acc += g.data[o * L + t];
        gB[o] += acc;
    }
    if (!gin) return;
    const RowMat gcols = weights(l).transpose() * G;
    *gin = Tensor(in.shape);
    const auto pad = static_cast<std::ptrdiff_t>((K - 1) / 2);
    for (std::size_t i = 0; i < C; ++i) {
        double* girow = gin->data.data() + i * L;
        for (std::size_t k = 0; k < K; ++k) {
            const double* crow = gcols.data() + (i * K + k) * L;
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
            const auto [t0, t1] = valid_range(static_cast<std::ptrdiff_t>(L), shift);
            for (std::ptrdiff_t t = t0; t < t1; ++t) girow[t + shift] += crow[t];
        }
    }
}

// ---------------------------------------------------------------- Conv3D

void layer_forward(const Conv3D& l, const Tensor& in, Tensor& out) {
    const std::size_t C = l.in, O = l.out, K = l.kernel;
    const std::size_t D = in.shape[1], H = in.shape[2], Wd = in.shape[3];
    const auto pad = static_cast<std::ptrdiff_t>((K - 1) / 2);
    const std::size_t plane = H * Wd, vol = D * plane, K3 = K * K * K;
    const double* W = l.params.data();
    const double* B = W + O * C * K3;
    out = Tensor({O, D, H, Wd});
    for (std::size_t o = 0; o < O; ++o) {
        double* ovol = out.data.data() + o * vol;
        std::fill(ovol, ovol + vol, B[o]);
        for (std::size_t i = 0; i < C; ++i) {
            const double* ivol = in.data.data() + i * vol;
            for (std::size_t kd = 0; kd < K; ++kd)
                for (std::size_t kh = 0; kh < K; ++kh)
                    for (std::size_t kw = 0; kw < K; ++kw) {
                        const double w = W[(o * C + i) * K3 + (kd * K + kh) * K + kw];
                        const auto sd = static_cast<std::ptrdiff_t>(kd) - pad;
                        const auto sh = static_cast<std::ptrdiff_t>(kh) - pad;
                        const auto sw = static_cast<std::ptrdiff_t>(kw) - pad;
                        const auto [d0, d1] = valid_range(static_cast<std::ptrdiff_t>(D), sd);
                        const auto [h0, h1] = valid_range(static_cast<std::ptrdiff_t>(H), sh);
                        const auto [w0, w1] = valid_range(static_cast<std::ptrdiff_t>(Wd), sw);
                        for (std::ptrdiff_t d = d0; d < d1; ++d)
                            for (std::ptrdiff_t h = h0; h < h1; ++h) {
                                double* orow = ovol + (d * static_cast<std::ptrdiff_t>(H) + h) * static_cast<std::ptrdiff_t>(Wd);
                                const double* irow =
                                    ivol + ((d + sd) * static_cast<std::ptrdiff_t>(H) + (h + sh)) * static_cast<std::ptrdiff_t>(Wd) + sw;
                                for (std::ptrdiff_t x = w0; x < w1; ++x) orow[x] += w * irow[x];
                            }
                    }
        }
    }
}

void layer_backward(const Conv3D& l, const Tensor& in, const Tensor& g, Tensor* gin, double* gp) {
    const std::size_t C = l.in, O = l.out, K = l.kernel;
    const std::size_t D = in.shape[1], H = in.shape[2], Wd = in.shape[3];
    const auto pad = static_cast<std::ptrdiff_t>((K - 1) / 2);
    const std::size_t plane = H * Wd, vol = D * plane, K3 = K * K * K;
    const double* W = l.params.data();
    double* gW = gp;
    double* gB = gp + O * C * K3;
    if (gin) *gin = Tensor(in.shape);
    const auto Hs = static_cast<std::ptrdiff_t>(H), Ws = static_cast<std::ptrdiff_t>(Wd);
    for (std::size_t o = 0; o < O; ++o) {
        const double* gvol = g.data.data() + o * vol;
        double sb = 0.0;
        for (std::size_t v = 0; v < vol; ++v) sb += gvol[v];
        gB[o] += sb;
        for (std::size_t i = 0; i < C; ++i) {
            const double* ivol = in.data.data() + i * vol;
            double* givol = gin ? gin->data.data() + i * vol : nullptr;
            for (std::size_t kd = 0; kd < K; ++kd)
                for (std::size_t kh = 0; kh < K; ++kh)
                    for (std::size_t kw = 0; kw < K; ++kw) {
                        const std::size_t wi = (o * C + i) * K3 + (kd * K + kh) * K + kw;
                        const double w = W[wi];
                        const auto sd = static_cast<std::ptrdiff_t>(kd) - pad;
                        const auto sh = static_cast<std::ptrdiff_t>(kh) - pad;
                        const auto sw = static_cast<std::ptrdiff_t>(kw) - pad;
                        const auto [d0, d1] = valid_range(static_cast<std::ptrdiff_t>(D), sd);
                        const auto [h0, h1] = valid_range(Hs, sh);
                        const auto [w0, w1] = valid_range(Ws, sw);
                        double s = 0.0;
                        for (std::ptrdiff_t d = d0; d < d1; ++d)
                            for (std::ptrdiff_t h = h0; h < h1; ++h) {
                                const double* grow = gvol + (d * Hs + h) * Ws;
                                const std::ptrdiff_t ioff = ((d + sd) * Hs + (h + sh)) * Ws + sw;
                                const double* irow = ivol + ioff;
                                for (std::ptrdiff_t x = w0; x < w1; ++x) s += grow[x] * irow[x];
                                if (givol) {
                                    double* girow = givol + ioff;
                                    for (std::ptrdiff_t x = w0; x < w1; ++x) girow[x] += w * grow[x];
                                }
                            }
                        gW[wi] += s;
                    }
        }
    }
}

// ---------------------------------------------------------------- pooling

void layer_forward(const MaxPool1D& l, const Tensor& in, Tensor& out) {
    const std::size_t C = in.shape[0], L = in.shape[1], P = l.pool, Lo = L / P;
    out = Tensor({C, Lo});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < Lo; ++j) {
            const double* src = in.data.data() + c * L + j * P;
            out.data[c * Lo + j] = *std::max_element(src, src + P);
        }
}

void layer_backward(const MaxPool1D& l, const Tensor& in, const Tensor& g, Tensor* gin, double*) {
    if (!gin) return;
    const std::size_t C = in.shape[0], L = in.shape[1], P = l.pool, Lo = L / P;
    *gin = Tensor(in.shape);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < Lo; ++j) {
            const double* src = in.data.data() + c * L + j * P;
            const auto arg = static_cast<std::size_t>(std::max_element(src, src + P) - src);
            gin->data[c * L + j * P + arg] += g.data[c * Lo + j];
        }
}

void layer_forward(const MaxPool3D& l, const Tensor& in, Tensor& out) {
    const std::size_t C = in.shape[0], D = in.shape[1], H = in.shape[2], W = in.shape[3], P = l.pool;
    const std::size_t Do = D / P, Ho = H / P, Wo = W / P;
    out = Tensor({C, Do, Ho, Wo});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t d = 0; d < Do; ++d)
            for (std::size_t h = 0; h < Ho; ++h)
                for (std::size_t w = 0; w < Wo; ++w) {
                    double m = -std::numeric_limits<double>::infinity();
                    for (std::size_t a = 0; a < P; ++a)
                        for (std::size_t b = 0; b < P; ++b)
                            for (std::size_t e = 0; e < P; ++e)
                                m = std::max(m, in.data[((c * D + d * P + a) * H + h * P + b) * W + w * P + e]);
                    out.data[((c * Do + d) * Ho + h) * Wo + w] = m;
                }
}

void layer_backward(const MaxPool3D& l, const Tensor& in, const Tensor& g, Tensor* gin, double*) {
    if (!gin) return;
    const std::size_t C = in.shape[0], D = in.shape[1], H = in.shape[2], W = in.shape[3], P = l.pool;
    const std::size_t Do = D / P, Ho = H / P, Wo = W / P;
    *gin = Tensor(in.shape);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t d = 0; d < Do; ++d)
            for (std::size_t h = 0; h < Ho; ++h)
                for (std::size_t w = 0; w < Wo; ++w) {
                    std::size_t arg = 0;
                    double m = -std::numeric_limits<double>::infinity();
                    for (std::size_t a = 0; a < P; ++a)
                        for (std::size_t b = 0; b < P; ++b)
                            for (std::size_t e = 0; e < P; ++e) {
                                const std::size_t idx = ((c * D + d * P + a) * H + h * P + b) * W + w * P + e;
                                if (in.data[idx] > m) {
                                    m = in.data[idx];
                                    arg = idx;
                                }
                            }
                    gin->data[arg] += g.data[((c * Do + d) * Ho + h) * Wo + w];
                }
}

// ---------------------------------------------------------------- pointwise, GAP, dense

void layer_forward(const ReLU&, const Tensor& in, Tensor& out) {
    out = in;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
}

void layer_backward(const ReLU&, const Tensor& in, const Tensor& g, Tensor* gin, double*) {
    if (!gin) return;
    *gin = g;
    for (std::size_t i = 0; i < in.data.size(); ++i)
        if (!(in.data[i] > 0.0)) gin->data[i] = 0.0;
}

void layer_forward(const GlobalAvgPool&, const Tensor& in, Tensor& out) {
    const std::size_t C = in.shape[0], S = in.size() / C;
    out = Tensor({C});
    for (std::size_t c = 0; c < C; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < S; ++k) s += in.data[c * S + k];
        out.data[c] = s / static_cast<double>(S);
    }
}

void layer_backward(const GlobalAvgPool&, const Tensor& in, const Tensor& g, Tensor* gin, double*) {
    if (!gin) return;
    const std::size_t C = in.shape[0], S = in.size() / C;
    *gin = Tensor(in.shape);
    for (std::size_t c = 0; c < C; ++c) {
        const double v = g.data[c] / static_cast<double>(S);
        std::fill(gin->data.begin() + static_cast<std::ptrdiff_t>(c * S),
                  gin->data.begin() + static_cast<std::ptrdiff_t>((c + 1) * S), v);
    }
}

void layer_forward(const Dense& l, const Tensor& in, Tensor& out) {
    const double* W = l.params.data();
    const double* B = W + l.out * l.in;
    out = Tensor({l.out});
    for (std::size_t o = 0; o < l.out; ++o) {
        double s = B[o];
        for (std::size_t i = 0; i < l.in; ++i) s += W[o * l.in + i] * in.data[i];
        out.data[o] = s;
    }
}

void layer_backward(const Dense& l, const Tensor& in, const Tensor& g, Tensor* gin, double* gp) {
    const double* W = l.params.data();
    double* gW = gp;
    double* gB = gp + l.out * l.in;
    if (gin) *gin = Tensor(in.shape);
    for (std::size_t o = 0; o < l.out; ++o) {
        const double go = g.data[o];
        gB[o] += go;
        for (std::size_t i = 0; i < l.in; ++i) {
            gW[o * l.in + i] += go * in.data[i];
            if (gin) gin->data[i] += W[o * l.in + i] * go;
        }
    }
}

// ---------------------------------------------------------------- helpers

std::vector<double>* params_of(Layer& l) {
    return std::visit(
        [](auto& x) -> std::vector<double>* {
            if constexpr (requires { x.params; })
                return &x.params;
            else
                return nullptr;
        },
        l);
}

const std::vector<double>* params_of(const Layer& l) { return params_of(const_cast<Layer&>(l)); }

std::size_t param_count(const LayerSpec& s) {
    if (s.kind == "conv1d") return s.out * s.in * s.kernel + s.out;
    if (s.kind == "conv3d") return s.out * s.in * s.kernel * s.kernel * s.kernel + s.out;
    if (s.kind == "dense") return s.out * s.in + s.out;
    return 0;
}

Shape weight_shape(const LayerSpec& s) {
    if (s.kind == "conv1d") return {s.out, s.in, s.kernel};
    if (s.kind == "conv3d") return {s.out, s.in, s.kernel, s.kernel, s.kernel};
    return {s.out, s.in};
}

Layer make_layer(const LayerSpec& s) {
    if (s.kind == "conv1d") return Conv1D{s.in, s.out, s.kernel, std::vector<double>(param_count(s), 0.0)};
    if (s.kind == "conv3d") return Conv3D{s.in, s.out, s.kernel, std::vector<double>(param_count(s), 0.0)};
    if (s.kind == "maxpool1d") return MaxPool1D{s.pool};
    if (s.kind == "maxpool3d") return MaxPool3D{s.pool};
    if (s.kind == "relu") return ReLU{};
    if (s.kind == "gap") return GlobalAvgPool{};
    if (s.kind == "dense") return Dense{s.in, s.out, std::vector<double>(param_count(s), 0.0)};
    throw ConfigError("unknown layer kind '" + s.kind + "'");
}

// Layers without the trailing sigmoid marker.
std::span<const LayerSpec> body(const NetworkConfig& cfg) {
    return std::span<const LayerSpec>(cfg.layers).first(cfg.layers.size() - 1);
}

}  // namespace

// ---------------------------------------------------------------- config

NetworkConfig default_cnn1d(std::size_t channels, std::size_t length) {
    NetworkConfig c;
    c.input_shape = {channels, length};
    c.layers = {{"conv1d", channels, 32, 7, 0}, {"relu"}, {"maxpool1d", 0, 0, 0, 2},
                {"conv1d", 32, 64, 5, 0},       {"relu"}, {"maxpool1d", 0, 0, 0, 2},
                {"conv1d", 64, 64, 3, 0},       {"relu"}, {"gap"},
                {"dense", 64, 1, 0, 0},         {"sigmoid"}};
    return c;
}

NetworkConfig default_cnn3d(std::size_t d0, std::size_t d1, std::size_t d2) {
    NetworkConfig c;
    c.input_shape = {1, d0, d1, d2};
    c.layers = {{"conv3d", 1, 8, 3, 0},  {"relu"}, {"maxpool3d", 0, 0, 0, 2}, {"conv3d", 8, 16, 3, 0},
                {"relu"},                {"gap"},  {"dense", 16, 1, 0, 0},     {"sigmoid"}};
    return c;
}

nlohmann::json to_json(const NetworkConfig& cfg) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : cfg.layers) {
        nlohmann::json j{{"kind", l.kind}};
        if (l.kind == "conv1d" || l.kind == "conv3d") j.update({{"in", l.in}, {"out", l.out}, {"kernel", l.kernel}});
        if (l.kind == "dense") j.update({{"in", l.in}, {"out", l.out}});
        if (l.kind == "maxpool1d" || l.kind == "maxpool3d") j["pool"] = l.pool;
        layers.push_back(j);
    }
    return {{"input_shape", cfg.input_shape}, {"layers", layers}};
}

NetworkConfig network_config_from_json(const nlohmann::json& j) {
    try {
        NetworkConfig cfg;
        cfg.input_shape = j.at("input_shape").get<Shape>();
        for (const auto& l : j.at("layers")) {
            LayerSpec s;
            s.kind = l.at("kind").get<std::string>();
            s.in = l.value("in", std::size_t{0});
            s.out = l.value("out", std::size_t{0});
            s.kernel = l.value("kernel", std::size_t{0});
            s.pool = l.value("pool", std::size_t{0});
            cfg.layers.push_back(s);
        }
        shape_trace(cfg);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed network config: ") + e.what());
    }
}

std::vector<Shape> shape_trace(const NetworkConfig& cfg) {
    if (cfg.layers.size() < 2 || cfg.layers.back().kind != "sigmoid")
        throw ConfigError("network must end with a sigmoid layer");
    std::vector<Shape> shapes{cfg.input_shape};
    Shape s = cfg.input_shape;
    auto fail = [&](std::size_t i, const std::string& why) {
        throw ConfigError("layer " + std::to_string(i) + " (" + cfg.layers[i].kind + "): " + why + ", input " +
                          shape_string(s));
    };
    for (std::size_t i = 0; i + 1 < cfg.layers.size(); ++i) {
        const auto& l = cfg.layers[i];
        if (l.kind == "conv1d" || l.kind == "conv3d") {
            const std::size_t rank = l.kind == "conv1d" ? 2 : 4;
            if (s.size() != rank) fail(i, "wrong input rank");
            if (s[0] != l.in) fail(i, "channel count mismatch");
            if (l.out == 0 || l.kernel == 0 || l.kernel % 2 == 0) fail(i, "needs out > 0 and an odd kernel");
            s[0] = l.out;
        } else if (l.kind == "maxpool1d" || l.kind == "maxpool3d") {
            const std::size_t rank = l.kind == "maxpool1d" ? 2 : 4;
            if (s.size() != rank) fail(i, "wrong input rank");
            if (l.pool < 1) fail(i, "pool must be >= 1");
            for (std::size_t a = 1; a < s.size(); ++a) {
                s[a] /= l.pool;
                if (s[a] == 0) fail(i, "pooling empties an axis");
            }
        } else if (l.kind == "relu") {
        } else if (l.kind == "gap") {
            if (s.size() < 2) fail(i, "needs a spatial axis");
            s = {s[0]};
        } else if (l.kind == "dense") {
            if (s.size() != 1 || s[0] != l.in) fail(i, "input size mismatch");
            if (l.out == 0) fail(i, "needs out > 0");
            s = {l.out};
        } else if (l.kind == "sigmoid") {
            fail(i, "sigmoid is only allowed as the final layer");
        } else {
            fail(i, "unknown layer kind");
        }
        shapes.push_back(s);
    }
    if (s != Shape{1}) throw ConfigError("network output before sigmoid must be a single unit");
    return shapes;
}

// ---------------------------------------------------------------- network

Network Network::build(const NetworkConfig& cfg, std::uint64_t seed) {
    Network net;
    net.cfg_ = cfg;
    net.shapes_ = shape_trace(cfg);
    Rng rng(seed);
    for (const auto& spec : body(cfg)) {
        Layer layer = make_layer(spec);
        if (auto* p = params_of(layer)) {
            const std::size_t nw = volume(weight_shape(spec));
            const std::size_t fan_in = nw / spec.out;
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
            for (std::size_t k = 0; k < nw; ++k) (*p)[k] = (2.0 * rng.uniform() - 1.0) * bound;
        }
        net.layers_.push_back(std::move(layer));
    }
    return net;
}

void Network::check_input(const Tensor& x) const {
    if (x.shape != cfg_.input_shape)
        throw FeatureMismatchError("network expects input " + shape_string(cfg_.input_shape) + ", got " +
                                   shape_string(x.shape));
}

double Network::logit(const Tensor& x) const {
    check_input(x);
    Tensor cur = x, next;
    for (const auto& layer : layers_) {
        std::visit([&](const auto& l) { layer_forward(l, cur, next); }, layer);
        std::swap(cur, next);
    }
    return cur.data[0];
}

// Clamped so that saturated logits still give a probability strictly inside (0, 1).
double Network::forward(const Tensor& x) const {
    return std::clamp(sigmoid(logit(x)), std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

std::vector<double> Network::forward_batch(std::span<const Tensor> batch) const {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& x : batch) out.push_back(forward(x));
    return out;
}

Gradients Network::zero_gradients() const {
    Gradients g;
    for (const auto& l : layers_) {
        const auto* p = params_of(l);
        g.emplace_back(p ? p->size() : 0, 0.0);
    }
    return g;
}

double Network::loss_and_gradient(std::span<const Tensor* const> batch, std::span<const int> labels,
                                  Gradients& grads) const {
    if (batch.size() != labels.size() || batch.empty()) throw ConfigError("batch and labels must be non-empty and equal");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<Tensor> acts(layers_.size() + 1);
    double loss = 0.0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        check_input(*batch[s]);
        acts[0] = *batch[s];
        for (std::size_t i = 0; i < layers_.size(); ++i)
            std::visit([&](const auto& l) { layer_forward(l, acts[i], acts[i + 1]); }, layers_[i]);
        const double p = sigmoid(acts.back().data[0]);
        loss += bce(p, labels[s]);

        Tensor g({1}, (p - labels[s]) * inv_b), gin;
        for (std::size_t i = layers_.size(); i-- > 0;) {
            Tensor* gin_ptr = i > 0 ? &gin : nullptr;
            double* gp = grads[i].empty() ? nullptr : grads[i].data();
            std::visit([&](const auto& l) { layer_backward(l, acts[i], g, gin_ptr, gp); }, layers_[i]);
            if (i > 0) std::swap(g, gin);
        }
    }
    return loss * inv_b;
}

std::vector<std::vector<double>> Network::snapshot() const {
    std::vector<std::vector<double>> snap;
    for (const auto& l : layers_) {
        const auto* p = params_of(l);
        snap.push_back(p ? *p : std::vector<double>{});
    }
    return snap;
}

void Network::restore(const std::vector<std::vector<double>>& snap) {
    if (snap.size() != layers_.size()) throw ConfigError("snapshot does not match network");
    for (std::size_t i = 0; i < layers_.size(); ++i)
        if (auto* p = params_of(layers_[i])) {
            if (p->size() != snap[i].size()) throw ConfigError("snapshot does not match network");
            *p = snap[i];
        }
}

std::vector<NamedArray> Network::parameters() const {
    std::vector<NamedArray> out;
    const auto specs = body(cfg_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto* p = params_of(layers_[i]);
        if (!p) continue;
        const Shape ws = weight_shape(specs[i]);
        const std::size_t nw = volume(ws);
        const std::string prefix = "layer" + std::to_string(i) + ".";
        out.push_back({prefix + "weight", ws, {p->begin(), p->begin() + static_cast<std::ptrdiff_t>(nw)}});
        out.push_back({prefix + "bias", {specs[i].out}, {p->begin() + static_cast<std::ptrdiff_t>(nw), p->end()}});
    }
    return out;
}

Network Network::from_parameters(const NetworkConfig& cfg, const std::vector<NamedArray>& arrays) {
    Network net = build(cfg, 0);
    const auto specs = body(cfg);
    for (std::size_t i = 0; i < net.layers_.size(); ++i) {
        auto* p = params_of(net.layers_[i]);
        if (!p) continue;
        const std::string prefix = "layer" + std::to_string(i) + ".";
        const auto& w = find_array(arrays, prefix + "weight");
        const auto& b = find_array(arrays, prefix + "bias");
        if (w.shape != weight_shape(specs[i]) || w.data.size() != volume(w.shape) || b.data.size() != specs[i].out)
            throw DataError("parameter arrays for layer " + std::to_string(i) + " do not match the network config");
        std::copy(w.data.begin(), w.data.end(), p->begin());
        std::copy(b.data.begin(), b.data.end(), p->begin() + static_cast<std::ptrdiff_t>(w.data.size()));
    }
    return net;
}

// ---------------------------------------------------------------- Adam

void Adam::step(Network& net, const Gradients& grads) {
    if (m_.empty()) {
        m_ = net.zero_gradients();
        v_ = net.zero_gradients();
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto* p = params_of(layers[i]);
        if (!p) continue;
        auto& m = m_[i];
        auto& v = v_[i];
        const auto& g = grads[i];
        for (std::size_t k = 0; k < p->size(); ++k) {
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
            (*p)[k] -= cfg_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.eps);
        }
    }
}

// ---------------------------------------------------------------- training

void validate(const TrainConfig& c) {
    if (!(c.lr > 0.0)) throw ConfigError("learning rate must be > 0");
    if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(c.eps > 0.0)) throw ConfigError("Adam epsilon must be > 0");
    if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (c.patience < 1 || c.patience > c.epochs) throw ConfigError("patience must lie in [1, epochs]");
    if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
}

std::string to_string(StopReason r) { return r == StopReason::EarlyStop ? "early_stop" : "max_epochs"; }

TrainResult train(const NetworkConfig& net_cfg, std::span<const Tensor> inputs, std::span<const int> labels,
                  const TrainConfig& cfg) {
    validate(cfg);
    if (inputs.size() != labels.size()) throw ConfigError("inputs and labels differ in length");
    const auto split = eval::stratified_split(labels, cfg.val_fraction, derive_seed(cfg.seed, 1));
    return train_split(net_cfg, inputs, labels, split.train, split.holdout, cfg);
}

TrainResult train_split(const NetworkConfig& net_cfg, std::span<const Tensor> inputs, std::span<const int> labels,
                        std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                        const TrainConfig& cfg) {
    validate(cfg);
    if (inputs.size() != labels.size()) throw ConfigError("inputs and labels differ in length");
    auto both_classes = [&](std::span<const std::size_t> idx) {
        bool pos = false, neg = false;
        for (auto i : idx) (labels[i] ? pos : neg) = true;
        return pos && neg;
    };
    if (!both_classes(train_idx) || !both_classes(val_idx))
        throw DataError("degenerate split: each class must appear in both training and validation sets");

    TrainResult res{Network::build(net_cfg, derive_seed(cfg.seed, 0)), {}};
    Network& net = res.network;
    Adam adam(cfg);

    std::vector<int> val_labels;
    for (auto i : val_idx) val_labels.push_back(labels[i]);

    std::vector<std::size_t> order(train_idx.begin(), train_idx.end());
    double best_loss = std::numeric_limits<double>::infinity();
    auto best = net.snapshot();
    std::size_t since_best = 0;
    std::vector<const Tensor*> batch;
    std::vector<int> batch_labels;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, 1000 + epoch));
        rng.shuffle(order);
        double train_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            batch_labels.clear();
            for (std::size_t k = start; k < stop; ++k) {
                batch.push_back(&inputs[order[k]]);
                batch_labels.push_back(labels[order[k]]);
            }
            auto grads = net.zero_gradients();
            train_loss += net.loss_and_gradient(batch, batch_labels, grads) * static_cast<double>(stop - start);
            adam.step(net, grads);
        }
        train_loss /= static_cast<double>(order.size());

        std::vector<double> probs;
        double val_loss = 0.0;
        for (std::size_t k = 0; k < val_idx.size(); ++k) {
            probs.push_back(net.forward(inputs[val_idx[k]]));
            val_loss += bce(probs.back(), val_labels[k]);
        }
        val_loss /= static_cast<double>(val_idx.size());
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        res.history.epochs.push_back({epoch, train_loss, val_loss, eval::auc(probs, val_labels)});

        if (val_loss < best_loss) {
            best_loss = val_loss;
            best = net.snapshot();
            res.history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            res.history.stop = StopReason::EarlyStop;
            break;
        }
    }
    net.restore(best);
    return res;
}

}  // namespace szbp::neural
