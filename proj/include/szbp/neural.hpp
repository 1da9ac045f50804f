#pragma once

// Small convolutional networks with hand-written backpropagation, trained
// with Adam on binary cross-entropy and early stopping on validation loss.

#include "szbp/artifact.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace szbp::neural {

using Shape = std::vector<std::size_t>;

struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0);
    std::size_t size() const { return data.size(); }
    bool operator==(const Tensor&) const = default;
};

std::size_t volume(const Shape& s);
std::string shape_string(const Shape& s);

// ---------------------------------------------------------------- layers
// Per-sample shapes exclude the batch axis: 1D layers see [C, L], 3D layers
// see [C, D, H, W].

struct Conv1D {
    std::size_t in = 0, out = 0, kernel = 0;
    std::vector<double> params;  ///< weight [out][in][kernel] then bias [out]
};

struct Conv3D {
    std::size_t in = 0, out = 0, kernel = 0;
    std::vector<double> params;  ///< weight [out][in][k][k][k] then bias [out]
};

struct MaxPool1D {
    std::size_t pool = 2;
};

struct MaxPool3D {
    std::size_t pool = 2;
};

struct ReLU {};

/// Mean over all non-channel axes: [C, ...] -> [C].
struct GlobalAvgPool {};

struct Dense {
    std::size_t in = 0, out = 0;
    std::vector<double> params;  ///< weight [out][in] then bias [out]
};

using Layer = std::variant<Conv1D, Conv3D, MaxPool1D, MaxPool3D, ReLU, GlobalAvgPool, Dense>;

// ---------------------------------------------------------------- config

struct LayerSpec {
    std::string kind;  ///< conv1d, conv3d, maxpool1d, maxpool3d, relu, gap, dense, sigmoid
    std::size_t in = 0, out = 0, kernel = 0, pool = 0;
    bool operator==(const LayerSpec&) const = default;
};

struct NetworkConfig {
    Shape input_shape;
    std::vector<LayerSpec> layers;  ///< must end with dense(.. -> 1) then sigmoid
    bool operator==(const NetworkConfig&) const = default;
};

/// conv(in->32,k7) relu pool2 conv(32->64,k5) relu pool2 conv(64->64,k3) relu gap dense(64->1) sigmoid.
NetworkConfig default_cnn1d(std::size_t channels, std::size_t length);
/// conv3d(1->8,k3) relu pool2 conv3d(8->16,k3) relu gap dense(16->1) sigmoid over a [1, d0, d1, d2] input.
NetworkConfig default_cnn3d(std::size_t d0, std::size_t d1, std::size_t d2);

nlohmann::json to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const nlohmann::json& j);

/// Per-sample shapes after every layer, starting with the input shape.
/// Throws ConfigError on an inconsistent channel chain.
std::vector<Shape> shape_trace(const NetworkConfig& cfg);

// ---------------------------------------------------------------- network

/// Per-layer gradient buffers, parallel to the layers' parameter vectors.
using Gradients = std::vector<std::vector<double>>;

class Network {
public:
    /// Kaiming-uniform weights (fan-in), zero biases.
    static Network build(const NetworkConfig& cfg, std::uint64_t seed);

    const NetworkConfig& config() const { return cfg_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    /// Pre-sigmoid output for one sample.
    double logit(const Tensor& x) const;
    /// Sigmoid probability for one sample, in (0, 1).
    double forward(const Tensor& x) const;
    std::vector<double> forward_batch(std::span<const Tensor> batch) const;

    Gradients zero_gradients() const;
    /// Mean BCE over the batch; gradients of that mean are added to `grads`.
    double loss_and_gradient(std::span<const Tensor* const> batch, std::span<const int> labels, Gradients& grads) const;

    /// All trainable parameters, one vector per layer (empty for parameter-free layers).
    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snap);

    std::vector<NamedArray> parameters() const;
    static Network from_parameters(const NetworkConfig& cfg, const std::vector<NamedArray>& arrays);

private:
    void check_input(const Tensor& x) const;

    NetworkConfig cfg_;
    std::vector<Layer> layers_;
    std::vector<Shape> shapes_;
};

/// Binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double bce(double p, int y);

// ---------------------------------------------------------------- training

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::size_t patience = 20;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
    std::size_t epoch = 0;  ///< 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_auc = 0.0;
    bool operator==(const EpochRecord&) const = default;
};

enum class StopReason { MaxEpochs, EarlyStop };
std::string to_string(StopReason r);

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  ///< 1-based epoch with the lowest validation loss
    StopReason stop = StopReason::MaxEpochs;
    bool operator==(const TrainHistory&) const = default;
};

class Adam {
public:
    explicit Adam(const TrainConfig& cfg) : cfg_(cfg) {}
    void step(Network& net, const Gradients& grads);

private:
    TrainConfig cfg_;
    std::size_t t_ = 0;
    Gradients m_, v_;
};

struct TrainResult {
    Network network;
    TrainHistory history;
};

/// Stratified (1 - val_fraction) / val_fraction split by seed, then train_split.
TrainResult train(const NetworkConfig& net_cfg, std::span<const Tensor> inputs, std::span<const int> labels,
                  const TrainConfig& cfg);

/// Trains on `train_idx`, early-stops on the BCE of `val_idx`, and returns the
/// network restored to its best-validation-loss epoch.
TrainResult train_split(const NetworkConfig& net_cfg, std::span<const Tensor> inputs, std::span<const int> labels,
                        std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                        const TrainConfig& cfg);

}  // namespace szbp::neural
