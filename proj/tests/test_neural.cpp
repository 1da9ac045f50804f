#include "support.hpp"
#include "szbp/dataio.hpp"
#include "szbp/eval.hpp"
#include "szbp/neural.hpp"

#include <doctest.h>

#include <algorithm>

using namespace szbp;
using namespace szbp::neural;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.normal();
    return t;
}

// Labels follow the sign of channel 0's mean, so the task is learnable.
struct Toy {
    std::vector<Tensor> x;
    std::vector<int> y;
};

Toy toy_cohort(std::size_t n, std::size_t channels, std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    Toy t;
    for (std::size_t i = 0; i < n; ++i) {
        auto x = random_tensor({channels, length}, rng);
        const int label = static_cast<int>(i % 2);
        for (std::size_t k = 0; k < length; ++k) x.data[k] += label ? 0.8 : -0.8;
        t.x.push_back(std::move(x));
        t.y.push_back(label);
    }
    return t;
}

std::vector<double>& params_of(Layer& l) {
    static std::vector<double> none;
    return std::visit(
        [](auto& v) -> std::vector<double>& {
            if constexpr (requires { v.params; })
                return v.params;
            else
                return none;
        },
        l);
}

double loss_of(const Network& net, std::span<const Tensor* const> batch, std::span<const int> y) {
    auto g = net.zero_gradients();
    return net.loss_and_gradient(batch, y, g);
}

// Central differences on a random sample of parameters; returns the largest
// error relative to the largest analytic gradient entry.
double gradient_check(Network net, std::span<const Tensor* const> batch, std::span<const int> y, Rng& rng,
                      std::size_t samples) {
    auto grads = net.zero_gradients();
    net.loss_and_gradient(batch, y, grads);
    double scale = 1e-8, worst = 0.0;
    for (const auto& g : grads)
        for (double v : g) scale = std::max(scale, std::abs(v));
    const double h = 1e-6;
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t li;
        do li = rng.below(net.layers().size());
        while (grads[li].empty());
        auto& p = params_of(net.layers()[li]);
        const std::size_t k = rng.below(p.size());
        const double keep = p[k];
        p[k] = keep + h;
        const double up = loss_of(net, batch, y);
        p[k] = keep - h;
        const double down = loss_of(net, batch, y);
        p[k] = keep;
        worst = std::max(worst, std::abs((up - down) / (2 * h) - grads[li][k]));
    }
    return worst / scale;
}

NetworkConfig small_cnn1d(std::size_t channels, std::size_t length) {
    return {{channels, length},
            {{"conv1d", channels, 6, 5, 0},
             {"relu"},
             {"maxpool1d", 0, 0, 0, 2},
             {"conv1d", 6, 4, 3, 0},
             {"relu"},
             {"gap"},
             {"dense", 4, 1},
             {"sigmoid"}}};
}

std::vector<const Tensor*> pointers(const std::vector<Tensor>& v) {
    std::vector<const Tensor*> p;
    for (const auto& t : v) p.push_back(&t);
    return p;
}

}  // namespace

TEST_SUITE("neural") {
    TEST_CASE("zero weights give probability 0.5") {
        auto net = Network::build(default_cnn1d(4, 30), 1);
        for (auto& l : net.layers())
            for (double& v : params_of(l)) v = 0.0;
        Rng rng(2);
        CHECK(net.forward(random_tensor({4, 30}, rng)) == 0.5);
    }

    TEST_CASE("batched forward equals per-sample forward") {
        const auto net = Network::build(default_cnn1d(5, 40), 3);
        Rng rng(4);
        std::vector<Tensor> batch;
        for (int i = 0; i < 6; ++i) batch.push_back(random_tensor({5, 40}, rng));
        const auto out = net.forward_batch(batch);
        for (std::size_t i = 0; i < batch.size(); ++i) CHECK(out[i] == net.forward(batch[i]));
    }

    TEST_CASE("default 1D network on 234 samples halves the time axis twice") {
        const auto trace = shape_trace(default_cnn1d(105, 234));
        std::vector<std::size_t> lengths;
        for (const auto& s : trace)
            if (s.size() == 2 && (lengths.empty() || lengths.back() != s[1])) lengths.push_back(s[1]);
        CHECK(lengths == std::vector<std::size_t>{234, 117, 58});
        CHECK(trace.back() == Shape{1});
    }

    TEST_CASE("property: shape trace obeys per-layer shape rules for any length") {
        for (std::size_t L = 22; L <= 300; ++L) {
            const auto cfg = default_cnn1d(105, L);
            const auto trace = shape_trace(cfg);
            // The trace stops at the dense output; the sigmoid keeps its shape.
            REQUIRE(trace.size() == cfg.layers.size());
            for (std::size_t i = 0; i + 1 < cfg.layers.size(); ++i) {
                const auto& spec = cfg.layers[i];
                const auto &in = trace[i], &out = trace[i + 1];
                if (spec.kind == "conv1d") {
                    CHECK(out == Shape{spec.out, in[1]});
                } else if (spec.kind == "maxpool1d") {
                    CHECK(out == Shape{in[0], in[1] / spec.pool});
                } else if (spec.kind == "relu" || spec.kind == "sigmoid") {
                    CHECK(out == in);
                } else if (spec.kind == "gap") {
                    CHECK(out == Shape{in[0]});
                }
            }
            CHECK(trace.back() == Shape{1});
        }
    }

    TEST_CASE("inconsistent channel chains and wrong inputs are rejected") {
        auto cfg = default_cnn1d(8, 40);
        cfg.layers[3].in = 31;
        CHECK_THROWS_AS(shape_trace(cfg), ConfigError);
        CHECK_THROWS_AS(shape_trace(default_cnn1d(8, 3)), ConfigError);
        const auto net = Network::build(default_cnn1d(8, 40), 0);
        CHECK_THROWS_AS(net.forward(Tensor({7, 40})), FeatureMismatchError);
        CHECK_THROWS_AS(net.forward(Tensor({8, 41})), FeatureMismatchError);
    }

    TEST_CASE("gradient check: 1D network against central differences") {
        Rng rng(5);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            std::vector<Tensor> x;
            for (int i = 0; i < 3; ++i) x.push_back(random_tensor({8, 20}, rng));
            const std::vector<int> y{1, 0, 1};
            const auto p = pointers(x);
            CHECK(gradient_check(Network::build(small_cnn1d(8, 20), seed), p, y, rng, 150) < 1e-4);
            CHECK(gradient_check(Network::build(default_cnn1d(8, 20), seed), p, y, rng, 60) < 1e-4);
        }
    }

    TEST_CASE("gradient check: 3D network against central differences") {
        Rng rng(6);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            std::vector<Tensor> x;
            for (int i = 0; i < 2; ++i) x.push_back(random_tensor({1, 6, 5, 4}, rng));
            const std::vector<int> y{0, 1};
            CHECK(gradient_check(Network::build(default_cnn3d(6, 5, 4), seed), pointers(x), y, rng, 100) < 1e-4);
        }
    }

    TEST_CASE("a dead first ReLU passes exactly zero gradient to the first layer") {
        auto net = Network::build(small_cnn1d(3, 16), 7);
        auto& conv = std::get<Conv1D>(net.layers()[0]);
        const std::size_t n_weight = conv.out * conv.in * conv.kernel;
        for (std::size_t k = 0; k < conv.params.size(); ++k) conv.params[k] = k < n_weight ? 0.0 : -1.0;
        Rng rng(8);
        std::vector<Tensor> x{random_tensor({3, 16}, rng), random_tensor({3, 16}, rng)};
        const std::vector<int> y{1, 0};
        auto g = net.zero_gradients();
        net.loss_and_gradient(pointers(x), y, g);
        CHECK(std::all_of(g[0].begin(), g[0].end(), [](double v) { return v == 0.0; }));
    }

    TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
        const auto net = Network::build(small_cnn1d(4, 24), 9);
        Rng rng(10);
        std::vector<Tensor> x{random_tensor({4, 24}, rng), random_tensor({4, 24}, rng), random_tensor({4, 24}, rng)};
        std::vector<int> y{1, 0, 0};
        auto g1 = net.zero_gradients();
        const double l1 = net.loss_and_gradient(pointers(x), y, g1);
        auto xx = x;
        xx.insert(xx.end(), x.begin(), x.end());
        std::vector<int> yy = y;
        yy.insert(yy.end(), y.begin(), y.end());
        auto g2 = net.zero_gradients();
        const double l2 = net.loss_and_gradient(pointers(xx), yy, g2);
        CHECK(l2 == doctest::Approx(l1).epsilon(1e-12));
        for (std::size_t i = 0; i < g1.size(); ++i)
            for (std::size_t k = 0; k < g1[i].size(); ++k)
                CHECK(g2[i][k] == doctest::Approx(g1[i][k]).epsilon(1e-9).scale(1e-12));
    }

    TEST_CASE("200 full-batch Adam steps halve the training loss") {
        const auto toy = toy_cohort(16, 4, 24, 11);
        auto net = Network::build(small_cnn1d(4, 24), 12);
        const auto p = pointers(toy.x);
        TrainConfig tc;
        tc.lr = 1e-2;
        Adam adam(tc);
        const double start = loss_of(net, p, toy.y);
        for (int step = 0; step < 200; ++step) {
            auto g = net.zero_gradients();
            net.loss_and_gradient(p, toy.y, g);
            adam.step(net, g);
        }
        CHECK(loss_of(net, p, toy.y) <= 0.5 * start);
    }

    TEST_CASE("early stopping: rising validation loss stops after patience and restores epoch 1") {
        // The validation rows repeat the training inputs with flipped labels.
        auto toy = toy_cohort(24, 4, 24, 13);
        std::vector<Tensor> x = toy.x;
        x.insert(x.end(), toy.x.begin(), toy.x.end());
        std::vector<int> y = toy.y;
        for (int v : toy.y) y.push_back(1 - v);
        std::vector<std::size_t> tr(24), va(24);
        for (std::size_t i = 0; i < 24; ++i) tr[i] = i, va[i] = 24 + i;

        TrainConfig tc;
        tc.epochs = 60;
        tc.patience = 20;
        tc.batch_size = 8;
        tc.lr = 5e-3;
        tc.seed = 14;
        const auto cfg = small_cnn1d(4, 24);
        const auto res = train_split(cfg, x, y, tr, va, tc);
        CHECK(res.history.stop == StopReason::EarlyStop);
        CHECK(res.history.epochs.size() == 21);
        CHECK(res.history.best_epoch == 1);

        tc.epochs = 1;
        tc.patience = 1;
        const auto once = train_split(cfg, x, y, tr, va, tc);
        CHECK(once.history.stop == StopReason::MaxEpochs);
        CHECK(once.history.epochs[0] == res.history.epochs[0]);
        CHECK(once.network.snapshot() == res.network.snapshot());
    }

    TEST_CASE("training is deterministic, outputs lie in (0, 1) and losses are finite") {
        const auto toy = toy_cohort(30, 3, 20, 15);
        TrainConfig tc;
        tc.epochs = 5;
        tc.patience = 5;
        tc.batch_size = 8;
        tc.seed = 16;
        const auto a = train(small_cnn1d(3, 20), toy.x, toy.y, tc);
        const auto b = train(small_cnn1d(3, 20), toy.x, toy.y, tc);
        CHECK(a.history == b.history);
        CHECK(a.network.snapshot() == b.network.snapshot());
        for (const auto& e : a.history.epochs) {
            CHECK(std::isfinite(e.train_loss));
            CHECK(std::isfinite(e.val_loss));
        }
        Rng rng(17);
        for (int i = 0; i < 50; ++i) {
            auto x = random_tensor({3, 20}, rng);
            for (double& v : x.data) v *= 1e3;
            const double p = a.network.forward(x);
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
        CHECK(std::isfinite(bce(0.0, 1)));
        CHECK(std::isfinite(bce(1.0, 0)));
        CHECK(bce(0.5, 1) == doctest::Approx(std::log(2.0)));
    }

    TEST_CASE("training configuration is validated") {
        const auto toy = toy_cohort(20, 2, 16, 18);
        TrainConfig tc;
        tc.patience = 0;
        CHECK_THROWS_AS(validate(tc), ConfigError);
        tc = {};
        tc.patience = 101;
        CHECK_THROWS_AS(validate(tc), ConfigError);
        tc = {};
        tc.val_fraction = 1.0;
        CHECK_THROWS_AS(validate(tc), ConfigError);
        std::vector<int> ones(20, 1);
        CHECK_THROWS_AS(train(small_cnn1d(2, 16), toy.x, ones, TrainConfig{}), DataError);
    }

    TEST_CASE("restore puts back the exact snapshot") {
        auto net = Network::build(small_cnn1d(3, 16), 19);
        const auto snap = net.snapshot();
        auto other = Network::build(small_cnn1d(3, 16), 20);
        CHECK(other.snapshot() != snap);
        other.restore(snap);
        CHECK(other.snapshot() == snap);
    }

    TEST_CASE("configuration and parameters round-trip") {
        for (const auto& cfg : {default_cnn1d(105, 234), default_cnn3d(12, 11, 105), small_cnn1d(3, 16)}) {
            CHECK(network_config_from_json(to_json(cfg)) == cfg);
        }
        CHECK_THROWS_AS(network_config_from_json(nlohmann::json{{"layers", 3}}), ConfigError);
        const auto net = Network::build(default_cnn3d(6, 5, 4), 21);
        const auto back = Network::from_parameters(net.config(), net.parameters());
        CHECK(back.snapshot() == net.snapshot());
        Rng rng(22);
        const auto x = random_tensor({1, 6, 5, 4}, rng);
        CHECK(back.forward(x) == net.forward(x));
    }

    TEST_CASE("a separable synthetic cohort is learned to validation AUC >= 0.85") {
        dataio::SynthConfig sc;
        sc.n_subjects = 120;
        sc.snr_db = 10.0;
        sc.seed = 3;
        const auto ds = dataio::generate_synthetic(sc);
        std::vector<Tensor> x;
        for (const auto& s : ds.subjects) x.push_back(Tensor({s.icn.channels(), s.icn.length()}));
        for (std::size_t i = 0; i < ds.size(); ++i) std::ranges::copy(ds.subjects[i].icn.data.values(), x[i].data.begin());
        TrainConfig tc;
        tc.epochs = 30;
        tc.patience = 10;
        tc.seed = 3;
        const auto res = train(default_cnn1d(105, 234), x, labels_of(ds), tc);
        CHECK(res.history.epochs[res.history.best_epoch - 1].val_auc >= 0.85);
    }
}
