#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "nnn/rng.hpp"
#include "nnn/training.hpp"

using namespace nnn;

namespace {

LabeledDataset make_dataset(const std::vector<std::vector<double>>& xs,
                            const std::vector<std::size_t>& classes, std::size_t n_classes) {
    LabeledDataset d;
    d.n_rows = xs.size();
    d.n_cols = xs[0].size();
    d.n_classes = n_classes;
    for (const auto& x : xs) d.features.insert(d.features.end(), x.begin(), x.end());
    d.labels.assign(d.n_rows * n_classes, 0.0);
    for (std::size_t r = 0; r < d.n_rows; ++r) d.labels[r * n_classes + classes[r]] = 1.0;
    return d;
}

double mean_energy(const Network& net, const LabeledDataset& data) {
    double e = 0.0;
    for (std::size_t r = 0; r < data.n_rows; ++r) e += net.energy(data.row(r), data.label_row(r));
    return e / static_cast<double>(data.n_rows);
}

Network small_net(std::uint64_t seed) {
    // 2 inputs, 3 nucleus neurons, 2 outputs, densely wired
    NeuronLayout layout{2, 3, 2};
    const auto slots = free_slots(layout);
    const auto g =
        ArchitectureGenome::from_slot_bits(layout, slots, std::vector<std::uint8_t>(slots.size(), 1));
    return Network::init_params(g, seed);
}

} // namespace

TEST_CASE("learning rate zero leaves parameters unchanged") {
    const auto data = make_dataset({{0.1, 0.9}, {0.8, 0.2}, {0.4, 0.6}}, {0, 1, 0}, 2);
    const auto net = small_net(3);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    cfg.batch_size = 2;
    for (auto* train : {&train_bp, &train_edpm}) {
        const auto res = (*train)(net, data, cfg);
        CHECK(res.net.weights() == net.weights());
        CHECK(res.net.biases() == net.biases());
        CHECK(res.loss_history.size() == 3);
    }
}

TEST_CASE("backprop fits a single input-output pair") {
    NeuronLayout layout{1, 0, 1};
    ArchitectureGenome g(layout, {{0, 1}});
    const auto net = Network::init_params(g, 7);
    const auto data = make_dataset({{1.0}}, {0}, 1);
    TrainConfig cfg;
    cfg.learning_rate = 2.0;
    cfg.epochs = 400;
    cfg.batch_size = 1;
    const auto res = train_bp(net, data, cfg);
    CHECK(mean_energy(res.net, data) < 1e-3);
    CHECK(res.loss_history.front() > res.loss_history.back());
}

TEST_CASE("backprop drives training loss down on a separable problem") {
    Rng rng(11);
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> cls;
    for (int i = 0; i < 60; ++i) {
        const bool one = rng.bernoulli(0.5);
        const double mu = one ? 0.75 : 0.25;
        xs.push_back({mu + rng.uniform(-0.1, 0.1), mu + rng.uniform(-0.1, 0.1)});
        cls.push_back(one);
    }
    const auto data = make_dataset(xs, cls, 2);
    const auto net = small_net(1);
    TrainConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.epochs = 150;
    cfg.batch_size = 16;
    cfg.seed = 5;
    const auto res = train_bp(net, data, cfg);
    CHECK(mean_energy(res.net, data) < 0.35 * mean_energy(net, data));

    // predictions separate the classes
    std::size_t correct = 0;
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        const auto y = res.net.predict(data.row(r));
        correct += (y[1] > y[0]) == (data.label_index(r) == 1);
    }
    CHECK(static_cast<double>(correct) / data.n_rows >= 0.9);
}

TEST_CASE("backprop is deterministic in the seed") {
    const auto data = make_dataset({{0.1, 0.9}, {0.8, 0.2}, {0.3, 0.3}, {0.6, 0.9}}, {0, 1, 0, 1}, 2);
    const auto net = small_net(2);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 2;
    cfg.seed = 9;
    const auto a = train_bp(net, data, cfg);
    const auto b = train_bp(net, data, cfg);
    CHECK(a.net.weights() == b.net.weights());
    CHECK(a.loss_history == b.loss_history);
    cfg.seed = 10;
    const auto c = train_bp(net, data, cfg);
    CHECK(a.net.weights() != c.net.weights());
}

TEST_CASE("negative sampling stays in the unit box and reduces energy") {
    const auto net = small_net(4);
    std::vector<double> y = {1.0, 0.0};
    TrainConfig cfg;
    cfg.sample_steps = 40;
    cfg.sample_step_size = 0.01;
    std::size_t improved = 0, trials = 100;
    Rng rng(12);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng probe = rng; // peek at the starting point the sampler will draw
        std::vector<double> x0(2);
        for (auto& v : x0) v = probe.uniform();
        const double e0 = net.energy(x0, y);
        const auto s = sample_negative(net, y, cfg, rng);
        REQUIRE(s.x.size() == 2);
        for (double v : s.x) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const double e1 = net.energy(s.x, y);
        improved += e1 <= e0 + 1e-12;
    }
    // small steps follow the ascent direction of -E almost surely
    CHECK(improved >= 95);
}

TEST_CASE("negative sampling converges on a transparent quadratic") {
    // single input wired straight to one output, weight 1, bias 0:
    // f(x) = act(x); pulling y = act(0.8) makes x = 0.8 the optimum.
    NeuronLayout layout{1, 0, 1};
    ArchitectureGenome g(layout, {{0, 1}});
    Network net(g, Activation::Sigmoid);
    net.weights()[0] = 1.0;
    net.biases()[0] = 0.0;
    const double target_x = 0.8;
    const auto yv = net.predict(std::vector<double>{target_x});
    TrainConfig cfg;
    cfg.sample_steps = 4000;
    cfg.sample_step_size = 0.05;
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        const auto s = sample_negative(net, yv, cfg, rng);
        CHECK(std::fabs(s.x[0] - target_x) < 0.05);
    }
}

TEST_CASE("edpm batch update vanishes when negatives equal the data") {
    const auto data = make_dataset({{0.3, 0.7}, {0.6, 0.1}}, {0, 1}, 2);
    auto net = small_net(8);
    const auto w0 = net.weights();
    const auto b0 = net.biases();
    // hand the updater negatives that are exact copies of each row: the
    // positive and negative phases cancel term by term
    std::map<std::size_t, std::vector<std::vector<double>>> negs;
    negs[0] = {{0.3, 0.7}};
    negs[1] = {{0.6, 0.1}};
    const std::vector<std::size_t> rows = {0, 1};
    edpm_batch_update(net, data, rows, negs, 0.5);
    for (std::size_t i = 0; i < w0.size(); ++i)
        CHECK(net.weights()[i] == doctest::Approx(w0[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < b0.size(); ++i)
        CHECK(net.biases()[i] == doctest::Approx(b0[i]).epsilon(1e-12));
}

TEST_CASE("edpm batch update matches a hand-computed two-phase step") {
    const auto data = make_dataset({{0.2, 0.9}}, {0}, 2);
    auto net = small_net(21);
    const auto w0 = net.weights();
    const auto b0 = net.biases();
    const std::vector<std::vector<double>> negset = {{0.5, 0.5}, {0.9, 0.1}};
    std::map<std::size_t, std::vector<std::vector<double>>> negs;
    negs[0] = negset;

    // expected: theta += lr * (-grad_pos + mean_neg(grad)) where grad is
    // dE/dtheta (ascent on -E for the data, descent for the model samples)
    const auto gp = net.param_gradient(data.row(0), data.label_row(0));
    Gradients gn;
    gn.weights.assign(w0.size(), 0.0);
    gn.biases.assign(b0.size(), 0.0);
    for (const auto& x : negset) {
        const auto g = net.param_gradient(x, data.label_row(0));
        for (std::size_t i = 0; i < w0.size(); ++i) gn.weights[i] += g.weights[i] / negset.size();
        for (std::size_t i = 0; i < b0.size(); ++i) gn.biases[i] += g.biases[i] / negset.size();
    }

    const double lr = 0.3;
    const std::vector<std::size_t> rows = {0};
    edpm_batch_update(net, data, rows, negs, lr);
    for (std::size_t i = 0; i < w0.size(); ++i)
        CHECK(net.weights()[i] ==
              doctest::Approx(w0[i] + lr * (-gp.weights[i] + gn.weights[i])).epsilon(1e-10));
    for (std::size_t i = 0; i < b0.size(); ++i)
        CHECK(net.biases()[i] ==
              doctest::Approx(b0[i] + lr * (-gp.biases[i] + gn.biases[i])).epsilon(1e-10));
}

TEST_CASE("edpm training lowers the data energy") {
    Rng rng(17);
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> cls;
    for (int i = 0; i < 40; ++i) {
        const bool one = rng.bernoulli(0.5);
        const double mu = one ? 0.8 : 0.2;
        xs.push_back({mu + rng.uniform(-0.05, 0.05), mu + rng.uniform(-0.05, 0.05)});
        cls.push_back(one);
    }
    const auto data = make_dataset(xs, cls, 2);
    const auto net = small_net(30);
    TrainConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.epochs = 60;
    cfg.batch_size = 8;
    cfg.n_samples = 4;
    cfg.sample_steps = 20;
    cfg.seed = 2;
    const auto res = train_edpm(net, data, cfg);
    CHECK(mean_energy(res.net, data) < mean_energy(net, data));
    CHECK(res.loss_history.size() == cfg.epochs);
}

TEST_CASE("edpm is deterministic in the seed") {
    const auto data = make_dataset({{0.1, 0.9}, {0.8, 0.2}, {0.3, 0.3}, {0.6, 0.9}}, {0, 1, 0, 1}, 2);
    const auto net = small_net(5);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 4;
    cfg.batch_size = 2;
    cfg.n_samples = 3;
    cfg.sample_steps = 10;
    cfg.seed = 77;
    const auto a = train_edpm(net, data, cfg);
    const auto b = train_edpm(net, data, cfg);
    CHECK(a.net.weights() == b.net.weights());
    CHECK(a.net.biases() == b.net.biases());
    CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.learning_rate = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.learning_rate = 0.0; // explicit no-op trainer stays allowed
    CHECK_NOTHROW(cfg.validate());
}
