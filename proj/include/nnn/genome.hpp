#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nnn {

// Neurons live in one fixed order: inputs, then nucleus, then outputs.
// Every index-based structure in the library relies on this ordering.
struct NeuronLayout {
    std::size_t n_input = 0;
    std::size_t n_nucleus = 0;
    std::size_t n_output = 0;

    std::size_t total() const { return n_input + n_nucleus + n_output; }
    bool is_input(std::size_t i) const { return i < n_input; }
    bool is_output(std::size_t i) const { return i >= n_input + n_nucleus; }
    bool is_nucleus(std::size_t i) const { return !is_input(i) && !is_output(i); }
    std::size_t output_begin() const { return n_input + n_nucleus; }

    bool operator==(const NeuronLayout&) const = default;
};

struct Edge {
    std::uint32_t src = 0;
    std::uint32_t tgt = 0;
    bool operator==(const Edge&) const = default;
};

/// All connection slots a genome may switch on: src < tgt, src is not an
/// output, tgt is not an input. Order is row-major by (src, tgt) and is part
/// of the bit-vector encoding contract used by the swarm optimizer.
std::vector<Edge> free_slots(const NeuronLayout& layout);

struct GenomeViolation {
    std::size_t src = 0;
    std::size_t tgt = 0;
    std::string rule;
};

/// Binary connection matrix over a NeuronLayout. Construction accepts any
/// bit pattern; validate() reports the first rule violation, if any.
class ArchitectureGenome {
public:
    ArchitectureGenome() = default;
    explicit ArchitectureGenome(const NeuronLayout& layout);
    ArchitectureGenome(const NeuronLayout& layout, const std::vector<Edge>& edges);

    /// Decode a bit vector over free_slots(layout). Valid by construction.
    static ArchitectureGenome from_slot_bits(const NeuronLayout& layout,
                                             const std::vector<Edge>& slots,
                                             const std::vector<std::uint8_t>& bits);

    /// Fully bipartite connections between consecutive layers,
    /// widths = {n_input, hidden..., n_output}.
    static ArchitectureGenome layered(const std::vector<std::size_t>& widths);

    const NeuronLayout& layout() const { return layout_; }
    bool edge(std::size_t src, std::size_t tgt) const { return adj_[src * layout_.total() + tgt] != 0; }
    void set_edge(std::size_t src, std::size_t tgt, bool on);

    /// In-neighbors of neuron i (ascending source index).
    std::vector<std::size_t> in_neighbors(std::size_t i) const;
    std::size_t in_degree(std::size_t i) const;
    std::size_t n_connections() const;
    std::vector<Edge> edges() const;

    std::optional<GenomeViolation> validate() const;

    std::uint64_t hash() const;

    std::string serialize() const;
    static ArchitectureGenome deserialize(const std::string& text);
    void save(const std::string& path) const;
    static ArchitectureGenome load(const std::string& path);

    bool operator==(const ArchitectureGenome&) const = default;

private:
    NeuronLayout layout_;
    std::vector<std::uint8_t> adj_; // total x total, row = source
};

} // namespace nnn
