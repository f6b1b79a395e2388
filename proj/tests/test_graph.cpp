#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nnn/genome.hpp"
#include "nnn/network.hpp"
#include "nnn/rng.hpp"

using namespace nnn;

namespace {

ArchitectureGenome random_genome(const NeuronLayout& layout, double density, std::uint64_t seed) {
    const auto slots = free_slots(layout);
    std::vector<std::uint8_t> bits(slots.size());
    Rng rng(seed);
    for (auto& b : bits) b = rng.bernoulli(density) ? 1 : 0;
    return ArchitectureGenome::from_slot_bits(layout, slots, bits);
}

std::vector<double> random_input(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform();
    return x;
}

// Central finite difference of E w.r.t. one parameter slot.
template <class Get>
double fd(Network net, Get&& slot, std::span<const double> x, std::span<const double> y,
          double h = 1e-5) {
    double& p = slot(net);
    const double saved = p;
    p = saved + h;
    const double ep = net.energy(x, y);
    p = saved - h;
    const double em = net.energy(x, y);
    p = saved;
    return (ep - em) / (2.0 * h);
}

void check_close(double got, double want, double rel = 1e-4, double abs_floor = 1e-8) {
    const double err = std::fabs(got - want);
    const double tol = std::max(abs_floor, rel * std::max(std::fabs(got), std::fabs(want)));
    CHECK(err <= tol);
}

} // namespace

TEST_CASE("validate accepts the empty genome") {
    ArchitectureGenome g(NeuronLayout{2, 3, 1});
    CHECK(!g.validate());
}

TEST_CASE("validate rejects self-loops and reversed edges") {
    ArchitectureGenome g(NeuronLayout{2, 3, 1});
    g.set_edge(3, 3, true);
    auto v = g.validate();
    REQUIRE(v);
    CHECK(v->rule == "self-loop / not upper-triangular");
    g.set_edge(3, 3, false);
    g.set_edge(4, 2, true);
    v = g.validate();
    REQUIRE(v);
    CHECK(v->rule == "self-loop / not upper-triangular");
}

TEST_CASE("validate rejects edges out of outputs and into inputs") {
    ArchitectureGenome g(NeuronLayout{2, 4, 2});
    g.set_edge(6, 7, true); // output -> output
    auto v = g.validate();
    REQUIRE(v);
    CHECK(v->rule == "connection out of output neuron");
    CHECK(v->src == 6);

    ArchitectureGenome g2(NeuronLayout{2, 4, 2});
    g2.set_edge(0, 1, true); // input -> input
    v = g2.validate();
    REQUIRE(v);
    CHECK(v->rule == "connection into input neuron");
}

TEST_CASE("sigmoid neuron with zero weight and bias outputs 0.5") {
    ArchitectureGenome g(NeuronLayout{1, 1, 1}, {{0, 1}, {1, 2}});
    Network net(g, Activation::Sigmoid);
    const double x = 0.7;
    const auto a = net.forward(std::span(&x, 1));
    CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("forward is a pure function of theta and x") {
    const auto g = random_genome(NeuronLayout{3, 5, 2}, 0.6, 42);
    const auto net = Network::init_params(g, 7);
    const auto x = random_input(3, 9);
    const auto a1 = net.forward(x);
    const auto a2 = net.forward(x);
    CHECK(a1 == a2);
}

TEST_CASE("forward matches hand-computed propagation") {
    // 2 inputs, 3 nucleus, 1 output; weights written out explicitly and the
    // expected activations recomputed inline, term by term.
    ArchitectureGenome g(NeuronLayout{2, 3, 1},
                         {{0, 2}, {1, 2}, {0, 3}, {2, 3}, {2, 4}, {3, 5}, {4, 5}, {1, 5}});
    Network net(g, Activation::Sigmoid);
    // edge order is grouped by target, sources ascending:
    // tgt2: (0,2),(1,2); tgt3: (0,3),(2,3); tgt4: (2,4); tgt5: (1,5),(3,5),(4,5)
    net.weights() = {0.5, -0.25, 0.8, 1.5, -2.0, 0.3, 0.7, -1.1};
    net.biases() = {0.1, -0.2, 0.0, 0.4};

    const std::vector<double> x = {0.6, 0.9};
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double a2 = sig(0.1 + 0.5 * 0.6 - 0.25 * 0.9);
    const double a3 = sig(-0.2 + 0.8 * 0.6 + 1.5 * a2);
    const double a4 = sig(0.0 - 2.0 * a2);
    const double a5 = sig(0.4 + 0.3 * 0.9 + 0.7 * a3 - 1.1 * a4);

    const auto a = net.forward(x);
    CHECK(a[2] == doctest::Approx(a2).epsilon(1e-12));
    CHECK(a[3] == doctest::Approx(a3).epsilon(1e-12));
    CHECK(a[4] == doctest::Approx(a4).epsilon(1e-12));
    CHECK(a[5] == doctest::Approx(a5).epsilon(1e-12));
}

TEST_CASE("param gradient is zero at an exact fit") {
    const auto g = random_genome(NeuronLayout{2, 4, 2}, 0.7, 3);
    const auto net = Network::init_params(g, 5);
    const auto x = random_input(2, 11);
    const auto y = net.predict(x); // E = 0 by construction
    const auto grad = net.param_gradient(x, y);
    for (double v : grad.weights) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
    for (double v : grad.biases) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gradients match central finite differences on random nets") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng rng(mix_seed(1234, trial));
        const NeuronLayout layout{2 + rng.index(5), 1 + rng.index(8), 1 + rng.index(3)};
        const auto g = random_genome(layout, 0.3 + 0.5 * rng.uniform(), mix_seed(5, trial));
        const auto act = trial % 2 ? Activation::Tanh : Activation::Sigmoid;
        const auto net = Network::init_params(g, mix_seed(6, trial), act);
        const auto x = random_input(layout.n_input, mix_seed(7, trial));
        std::vector<double> y(layout.n_output);
        for (auto& v : y) v = rng.uniform();

        const auto grad = net.param_gradient(x, y);
        for (std::size_t w = 0; w < net.n_weights(); ++w) {
            check_close(grad.weights[w],
                        fd(net, [&](Network& n) -> double& { return n.weights()[w]; }, x, y));
        }
        for (std::size_t b = 0; b < net.n_biases(); ++b) {
            check_close(grad.biases[b],
                        fd(net, [&](Network& n) -> double& { return n.biases()[b]; }, x, y));
        }

        // input gradient, note it is d(-E)/dx
        const auto gx = net.input_gradient(x, y);
        for (std::size_t j = 0; j < layout.n_input; ++j) {
            std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
            const double h = 1e-5;
            xp[j] += h;
            xm[j] -= h;
            const double want = -(net.energy(xp, y) - net.energy(xm, y)) / (2 * h);
            check_close(gx[j], want);
        }
    }
}

TEST_CASE("gradient vanishes through a zero source activation") {
    // input 0 feeds the nucleus; x0 = 0 kills the weight gradient.
    ArchitectureGenome g(NeuronLayout{2, 1, 1}, {{0, 2}, {1, 2}, {2, 3}});
    auto net = Network::init_params(g, 21);
    const std::vector<double> x = {0.0, 0.8};
    const std::vector<double> y = {0.3};
    const auto grad = net.param_gradient(x, y);
    CHECK(grad.weights[0] == 0.0); // weight on edge (0,2)
}

TEST_CASE("input gradient is zero without a path to the energy") {
    // input 1 has no outgoing connections at all
    ArchitectureGenome g(NeuronLayout{2, 1, 1}, {{0, 2}, {2, 3}});
    auto net = Network::init_params(g, 2);
    const std::vector<double> x = {0.4, 0.6};
    const std::vector<double> y = {0.9};
    CHECK(net.input_gradient(x, y)[1] == 0.0);
}

TEST_CASE("input gradient is zero with all-zero weights") {
    auto g = random_genome(NeuronLayout{3, 4, 2}, 0.8, 33);
    Network net(g, Activation::Sigmoid); // all weights zero
    const auto x = random_input(3, 1);
    const std::vector<double> y = {1.0, 0.0};
    for (double v : net.input_gradient(x, y)) CHECK(v == 0.0);
}

TEST_CASE("init_params is deterministic and range-bounded") {
    const auto g = random_genome(NeuronLayout{4, 6, 2}, 0.7, 8);
    const auto a = Network::init_params(g, 99);
    const auto b = Network::init_params(g, 99);
    CHECK(a.weights() == b.weights());
    for (double v : a.biases()) CHECK(v == 0.0);

    // neuron with exactly 4 in-connections: bound is 1/2
    ArchitectureGenome g4(NeuronLayout{4, 1, 1}, {{0, 4}, {1, 4}, {2, 4}, {3, 4}, {4, 5}});
    double mean = 0.0;
    const int reps = 2500; // 2500 nets x 4 weights = 1e4 draws
    for (int r = 0; r < reps; ++r) {
        const auto net = Network::init_params(g4, mix_seed(17, r));
        for (std::size_t w = 0; w + 1 < net.n_weights(); ++w) {
            CHECK(net.weights()[w] >= -0.5);
            CHECK(net.weights()[w] <= 0.5);
            mean += net.weights()[w];
        }
    }
    mean /= reps * 4.0;
    CHECK(std::fabs(mean) < 0.02);
}

TEST_CASE("layered genome matches a direct layered MLP") {
    const std::vector<std::size_t> widths = {4, 3, 2};
    const auto g = ArchitectureGenome::layered(widths);
    CHECK(g.n_connections() == 4 * 3 + 3 * 2);
    auto net = Network::init_params(g, 31);
    const auto x = random_input(4, 77);

    // direct dense-layer evaluation on the same parameters
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    std::vector<double> hidden(3), out(2);
    // edge storage is grouped by target with ascending sources, so the weight
    // of (s -> t) within a layer block is at offset t_local*fan_in + s_local.
    for (std::size_t h = 0; h < 3; ++h) {
        double z = net.biases()[h];
        for (std::size_t i = 0; i < 4; ++i) z += net.weights()[h * 4 + i] * x[i];
        hidden[h] = sig(z);
    }
    for (std::size_t o = 0; o < 2; ++o) {
        double z = net.biases()[3 + o];
        for (std::size_t h = 0; h < 3; ++h) z += net.weights()[12 + o * 3 + h] * hidden[h];
        out[o] = sig(z);
    }

    const auto got = net.predict(x);
    CHECK(got[0] == doctest::Approx(out[0]).epsilon(1e-15));
    CHECK(got[1] == doctest::Approx(out[1]).epsilon(1e-15));
}

TEST_CASE("genome serialization round-trips") {
    const auto g = random_genome(NeuronLayout{5, 7, 3}, 0.5, 4);
    const auto back = ArchitectureGenome::deserialize(g.serialize());
    CHECK(back == g);
}

TEST_CASE("free slot bits always decode to valid genomes") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const NeuronLayout layout{1 + rng.index(6), 1 + rng.index(10), 1 + rng.index(4)};
        const auto g = random_genome(layout, rng.uniform(), mix_seed(2, seed));
        CHECK(!g.validate());
    }
}
