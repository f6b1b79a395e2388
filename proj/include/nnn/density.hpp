#pragma once

#include <span>
#include <string>
#include <vector>

#include "nnn/genome.hpp"

namespace nnn {

/// Per-neuron connecting-density vectors over the input neurons. Row i is a
/// sub-probability distribution: each entry in [0,1], row sum <= 1, and the
/// sum is exactly 1 when every ancestor chain of neuron i roots at an input.
class DensityMatrix {
public:
    DensityMatrix(std::size_t n_neurons, std::size_t n_input)
        : n_input_(n_input), d_(n_neurons * n_input, 0.0) {}

    std::size_t n_input() const { return n_input_; }
    std::size_t n_neurons() const { return d_.size() / n_input_; }
    std::span<const double> row(std::size_t i) const { return {d_.data() + i * n_input_, n_input_}; }
    std::span<double> row(std::size_t i) { return {d_.data() + i * n_input_, n_input_}; }

private:
    std::size_t n_input_;
    std::vector<double> d_;
};

/// One pass in neuron order. Input neuron j gets the one-hot row e_j; every
/// other neuron gets the arithmetic mean of its in-neighbors' rows, or the
/// zero row when it has no in-connections.
DensityMatrix compute_density(const ArchitectureGenome& genome);

/// Rows of the output neurons, in output order.
std::vector<std::vector<double>> output_densities(const DensityMatrix& dm, const NeuronLayout& layout);

/// CSV: one row per output neuron, one column per input neuron.
void dump_output_densities_csv(const DensityMatrix& dm, const NeuronLayout& layout,
                               const std::string& path);

} // namespace nnn
