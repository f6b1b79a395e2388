#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nnn/genome.hpp"

namespace nnn {

enum class Activation : std::uint8_t { Sigmoid = 0, Tanh = 1 };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

struct Gradients {
    std::vector<double> weights;
    std::vector<double> biases;
};

/// Weighted DAG network over an ArchitectureGenome. Edges are stored CSR-style
/// keyed by target neuron; weights align one-to-one with the active edges.
/// Immutable topology; parameters are plain data a trainer may overwrite.
class Network {
public:
    Network() = default;
    Network(const ArchitectureGenome& genome, Activation act);

    /// Weights uniform on [-s, +s] with s = 1/sqrt(max(1, in_degree(target))),
    /// biases zero. Deterministic in the seed.
    static Network init_params(const ArchitectureGenome& genome, std::uint64_t seed,
                               Activation act = Activation::Sigmoid);

    const ArchitectureGenome& genome() const { return genome_; }
    const NeuronLayout& layout() const { return genome_.layout(); }
    Activation activation() const { return act_; }

    std::size_t n_weights() const { return weights_.size(); }
    std::size_t n_biases() const { return biases_.size(); }
    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& biases() { return biases_; }
    const std::vector<double>& biases() const { return biases_; }

    /// Activations for every neuron in layout order; the first n_input
    /// entries are x itself.
    std::vector<double> forward(std::span<const double> x) const;

    /// Network outputs only.
    std::vector<double> predict(std::span<const double> x) const;

    /// Squared error E = ||y - f(x)||^2.
    double energy(std::span<const double> x, std::span<const double> y) const;

    /// dE/dtheta for E = ||y - f(x)||^2.
    Gradients param_gradient(std::span<const double> x, std::span<const double> y) const;

    /// d(-E)/dx; the signal that drives negative sampling.
    std::vector<double> input_gradient(std::span<const double> x, std::span<const double> y) const;

    /// Both of the above from one backward pass over precomputed activations.
    void backward(std::span<const double> activations, std::span<const double> y,
                  Gradients& param_grad, std::vector<double>* neg_input_grad) const;

    void save(const std::string& path, const std::map<std::string, std::string>& metadata = {}) const;
    static Network load(const std::string& path, std::map<std::string, std::string>* metadata = nullptr);

private:
    ArchitectureGenome genome_;
    Activation act_ = Activation::Sigmoid;
    // CSR over targets: in-edges of neuron i occupy [edge_begin_[i], edge_begin_[i+1]).
    std::vector<std::size_t> edge_begin_;
    std::vector<std::uint32_t> edge_src_;
    std::vector<double> weights_;
    std::vector<double> biases_; // per non-input neuron, index i - n_input
};

} // namespace nnn
