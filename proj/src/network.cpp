#include "nnn/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "nnn/rng.hpp"

namespace nnn {

Activation activation_from_name(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation a) {
    return a == Activation::Sigmoid ? "sigmoid" : "tanh";
}

namespace {

inline double act_fn(Activation a, double z) {
    return a == Activation::Sigmoid ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
}

// Derivative expressed through the activation value.
inline double act_prime(Activation a, double v) {
    return a == Activation::Sigmoid ? v * (1.0 - v) : 1.0 - v * v;
}

} // namespace

Network::Network(const ArchitectureGenome& genome, Activation act)
    : genome_(genome), act_(act) {
    if (auto v = genome.validate())
        throw std::invalid_argument("invalid genome: " + v->rule);
    const NeuronLayout& L = genome.layout();
    const std::size_t total = L.total();
    edge_begin_.assign(total + 1, 0);
    for (std::size_t i = 0; i < total; ++i) {
        edge_begin_[i + 1] = edge_begin_[i] + (L.is_input(i) ? 0 : genome.in_degree(i));
    }
    edge_src_.resize(edge_begin_[total]);
    for (std::size_t i = L.n_input; i < total; ++i) {
        std::size_t at = edge_begin_[i];
        for (std::size_t k : genome.in_neighbors(i)) {
            edge_src_[at++] = static_cast<std::uint32_t>(k);
        }
    }
    weights_.assign(edge_src_.size(), 0.0);
    biases_.assign(total - L.n_input, 0.0);
}

Network Network::init_params(const ArchitectureGenome& genome, std::uint64_t seed, Activation act) {
    Network net(genome, act);
    Rng rng(seed);
    const NeuronLayout& L = net.layout();
    for (std::size_t i = L.n_input; i < L.total(); ++i) {
        const std::size_t deg = net.edge_begin_[i + 1] - net.edge_begin_[i];
        const double s = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, deg)));
        for (std::size_t e = net.edge_begin_[i]; e < net.edge_begin_[i + 1]; ++e) {
            net.weights_[e] = rng.uniform(-s, s);
        }
    }
    return net;
}

std::vector<double> Network::forward(std::span<const double> x) const {
    const NeuronLayout& L = layout();
    if (x.size() != L.n_input) throw std::invalid_argument("forward: input dimension mismatch");
    std::vector<double> a(L.total());
    std::memcpy(a.data(), x.data(), L.n_input * sizeof(double));
    for (std::size_t i = L.n_input; i < L.total(); ++i) {
        double z = biases_[i - L.n_input];
        for (std::size_t e = edge_begin_[i]; e < edge_begin_[i + 1]; ++e) {
            z += weights_[e] * a[edge_src_[e]];
        }
        a[i] = act_fn(act_, z);
    }
    return a;
}

std::vector<double> Network::predict(std::span<const double> x) const {
    const std::vector<double> a = forward(x);
    const NeuronLayout& L = layout();
    return std::vector<double>(a.begin() + static_cast<std::ptrdiff_t>(L.output_begin()), a.end());
}

double Network::energy(std::span<const double> x, std::span<const double> y) const {
    const NeuronLayout& L = layout();
    if (y.size() != L.n_output) throw std::invalid_argument("energy: output dimension mismatch");
    const std::vector<double> a = forward(x);
    double e = 0.0;
    for (std::size_t o = 0; o < L.n_output; ++o) {
        const double d = y[o] - a[L.output_begin() + o];
        e += d * d;
    }
    return e;
}

void Network::backward(std::span<const double> a, std::span<const double> y,
                       Gradients& g, std::vector<double>* neg_input_grad) const {
    const NeuronLayout& L = layout();
    if (a.size() != L.total()) throw std::invalid_argument("backward: activation size mismatch");
    if (y.size() != L.n_output) throw std::invalid_argument("backward: output dimension mismatch");
    g.weights.assign(weights_.size(), 0.0);
    g.biases.assign(biases_.size(), 0.0);
    std::vector<double> dE_da(L.total(), 0.0);
    for (std::size_t o = 0; o < L.n_output; ++o) {
        const std::size_t i = L.output_begin() + o;
        dE_da[i] = -2.0 * (y[o] - a[i]);
    }
    for (std::size_t i = L.total(); i-- > L.n_input;) {
        const double dz = dE_da[i] * act_prime(act_, a[i]);
        g.biases[i - L.n_input] = dz;
        for (std::size_t e = edge_begin_[i]; e < edge_begin_[i + 1]; ++e) {
            g.weights[e] = dz * a[edge_src_[e]];
            dE_da[edge_src_[e]] += dz * weights_[e];
        }
    }
    if (neg_input_grad) {
        neg_input_grad->assign(L.n_input, 0.0);
        for (std::size_t j = 0; j < L.n_input; ++j) (*neg_input_grad)[j] = -dE_da[j];
    }
}

Gradients Network::param_gradient(std::span<const double> x, std::span<const double> y) const {
    Gradients g;
    backward(forward(x), y, g, nullptr);
    return g;
}

std::vector<double> Network::input_gradient(std::span<const double> x, std::span<const double> y) const {
    Gradients g;
    std::vector<double> gx;
    backward(forward(x), y, g, &gx);
    return gx;
}

namespace {

void write_u32(std::ofstream& f, std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ofstream& f, std::uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); }
std::uint32_t read_u32(std::ifstream& f) {
    std::uint32_t v = 0;
    if (!f.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("truncated model file");
    return v;
}
std::uint64_t read_u64(std::ifstream& f) {
    std::uint64_t v = 0;
    if (!f.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("truncated model file");
    return v;
}
void write_str(std::ofstream& f, const std::string& s) {
    write_u64(f, s.size());
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_str(std::ifstream& f) {
    std::string s(read_u64(f), '\0');
    if (!f.read(s.data(), static_cast<std::streamsize>(s.size())))
        throw std::runtime_error("truncated model file");
    return s;
}

constexpr std::uint32_t kModelMagic = 0x4e4e4e4d; // "MNNN"

} // namespace

void Network::save(const std::string& path, const std::map<std::string, std::string>& metadata) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write model file: " + path);
    write_u32(f, kModelMagic);
    write_u32(f, 1); // version
    write_str(f, genome_.serialize());
    write_u32(f, static_cast<std::uint32_t>(act_));
    write_u64(f, weights_.size());
    f.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(double)));
    write_u64(f, biases_.size());
    f.write(reinterpret_cast<const char*>(biases_.data()),
            static_cast<std::streamsize>(biases_.size() * sizeof(double)));
    write_u64(f, metadata.size());
    for (const auto& [k, v] : metadata) {
        write_str(f, k);
        write_str(f, v);
    }
}

Network Network::load(const std::string& path, std::map<std::string, std::string>* metadata) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read model file: " + path);
    if (read_u32(f) != kModelMagic) throw std::runtime_error("bad model magic: " + path);
    if (read_u32(f) != 1) throw std::runtime_error("unsupported model version: " + path);
    const ArchitectureGenome genome = ArchitectureGenome::deserialize(read_str(f));
    const auto act = static_cast<Activation>(read_u32(f));
    Network net(genome, act);
    const std::uint64_t nw = read_u64(f);
    if (nw != net.weights_.size()) throw std::runtime_error("model weight count mismatch");
    if (!f.read(reinterpret_cast<char*>(net.weights_.data()),
                static_cast<std::streamsize>(nw * sizeof(double))))
        throw std::runtime_error("truncated model file");
    const std::uint64_t nb = read_u64(f);
    if (nb != net.biases_.size()) throw std::runtime_error("model bias count mismatch");
    if (!f.read(reinterpret_cast<char*>(net.biases_.data()),
                static_cast<std::streamsize>(nb * sizeof(double))))
        throw std::runtime_error("truncated model file");
    const std::uint64_t nm = read_u64(f);
    for (std::uint64_t i = 0; i < nm; ++i) {
        std::string k = read_str(f);
        std::string v = read_str(f);
        if (metadata) (*metadata)[k] = v;
    }
    return net;
}

} // namespace nnn
