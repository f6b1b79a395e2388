#include "nnn/density.hpp"

#include <fstream>
#include <stdexcept>

namespace nnn {

DensityMatrix compute_density(const ArchitectureGenome& genome) {
    const NeuronLayout& L = genome.layout();
    const std::size_t total = L.total();
    DensityMatrix dm(total, L.n_input);
    for (std::size_t j = 0; j < L.n_input; ++j) dm.row(j)[j] = 1.0;
    for (std::size_t i = L.n_input; i < total; ++i) {
        const std::vector<std::size_t> omega = genome.in_neighbors(i);
        if (omega.empty()) continue; // zero row
        std::span<double> out = dm.row(i);
        for (std::size_t k : omega) {
            std::span<const double> src = dm.row(k);
            for (std::size_t j = 0; j < L.n_input; ++j) out[j] += src[j];
        }
        const double inv = 1.0 / static_cast<double>(omega.size());
        for (std::size_t j = 0; j < L.n_input; ++j) out[j] *= inv;
    }
    return dm;
}

std::vector<std::vector<double>> output_densities(const DensityMatrix& dm, const NeuronLayout& layout) {
    if (dm.n_neurons() != layout.total() || dm.n_input() != layout.n_input)
        throw std::invalid_argument("density matrix does not match layout");
    std::vector<std::vector<double>> out;
    out.reserve(layout.n_output);
    for (std::size_t o = 0; o < layout.n_output; ++o) {
        std::span<const double> r = dm.row(layout.output_begin() + o);
        out.emplace_back(r.begin(), r.end());
    }
    return out;
}

void dump_output_densities_csv(const DensityMatrix& dm, const NeuronLayout& layout,
                               const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write density csv: " + path);
    f << "output";
    for (std::size_t j = 0; j < layout.n_input; ++j) f << ",input_" << j;
    f << '\n';
    const auto rows = output_densities(dm, layout);
    f.precision(17);
    for (std::size_t o = 0; o < rows.size(); ++o) {
        f << o;
        for (double v : rows[o]) f << ',' << v;
        f << '\n';
    }
}

} // namespace nnn
