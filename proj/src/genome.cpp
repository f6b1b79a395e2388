#include "nnn/genome.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nnn {

std::vector<Edge> free_slots(const NeuronLayout& layout) {
    std::vector<Edge> slots;
    const std::size_t total = layout.total();
    for (std::size_t src = 0; src < total; ++src) {
        if (layout.is_output(src)) continue;
        for (std::size_t tgt = src + 1; tgt < total; ++tgt) {
            if (layout.is_input(tgt)) continue;
            slots.push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(tgt)});
        }
    }
    return slots;
}

ArchitectureGenome::ArchitectureGenome(const NeuronLayout& layout)
    : layout_(layout), adj_(layout.total() * layout.total(), 0) {}

ArchitectureGenome::ArchitectureGenome(const NeuronLayout& layout, const std::vector<Edge>& edges)
    : ArchitectureGenome(layout) {
    for (const Edge& e : edges) {
        if (e.src >= layout.total() || e.tgt >= layout.total())
            throw std::out_of_range("genome edge index out of range");
        adj_[e.src * layout.total() + e.tgt] = 1;
    }
}

ArchitectureGenome ArchitectureGenome::from_slot_bits(const NeuronLayout& layout,
                                                      const std::vector<Edge>& slots,
                                                      const std::vector<std::uint8_t>& bits) {
    if (slots.size() != bits.size())
        throw std::invalid_argument("slot/bit count mismatch");
    ArchitectureGenome g(layout);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (bits[i]) g.adj_[slots[i].src * layout.total() + slots[i].tgt] = 1;
    }
    return g;
}

ArchitectureGenome ArchitectureGenome::layered(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw std::invalid_argument("layered genome needs >= 2 layers");
    std::size_t hidden = 0;
    for (std::size_t l = 1; l + 1 < widths.size(); ++l) hidden += widths[l];
    NeuronLayout layout{widths.front(), hidden, widths.back()};
    ArchitectureGenome g(layout);
    std::size_t base = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t next = base + widths[l];
        for (std::size_t s = base; s < next; ++s)
            for (std::size_t t = next; t < next + widths[l + 1]; ++t)
                g.adj_[s * layout.total() + t] = 1;
        base = next;
    }
    return g;
}

void ArchitectureGenome::set_edge(std::size_t src, std::size_t tgt, bool on) {
    adj_[src * layout_.total() + tgt] = on ? 1 : 0;
}

std::vector<std::size_t> ArchitectureGenome::in_neighbors(std::size_t i) const {
    std::vector<std::size_t> nbrs;
    for (std::size_t k = 0; k < layout_.total(); ++k)
        if (adj_[k * layout_.total() + i]) nbrs.push_back(k);
    return nbrs;
}

std::size_t ArchitectureGenome::in_degree(std::size_t i) const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < layout_.total(); ++k)
        if (adj_[k * layout_.total() + i]) ++d;
    return d;
}

std::size_t ArchitectureGenome::n_connections() const {
    std::size_t n = 0;
    for (std::uint8_t b : adj_) n += b;
    return n;
}

std::vector<Edge> ArchitectureGenome::edges() const {
    std::vector<Edge> out;
    const std::size_t total = layout_.total();
    for (std::size_t s = 0; s < total; ++s)
        for (std::size_t t = 0; t < total; ++t)
            if (adj_[s * total + t])
                out.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)});
    return out;
}

std::optional<GenomeViolation> ArchitectureGenome::validate() const {
    const std::size_t total = layout_.total();
    for (std::size_t s = 0; s < total; ++s) {
        for (std::size_t t = 0; t < total; ++t) {
            if (!adj_[s * total + t]) continue;
            if (s >= t) return GenomeViolation{s, t, "self-loop / not upper-triangular"};
            if (layout_.is_input(t)) return GenomeViolation{s, t, "connection into input neuron"};
            if (layout_.is_output(s)) return GenomeViolation{s, t, "connection out of output neuron"};
        }
    }
    return std::nullopt;
}

std::uint64_t ArchitectureGenome::hash() const {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    mix(layout_.n_input);
    mix(layout_.n_nucleus);
    mix(layout_.n_output);
    for (std::size_t i = 0; i < adj_.size(); ++i)
        if (adj_[i]) mix(i);
    return h;
}

std::string ArchitectureGenome::serialize() const {
    std::ostringstream os;
    os << "NNNG1 " << layout_.n_input << ' ' << layout_.n_nucleus << ' ' << layout_.n_output << '\n';
    for (const Edge& e : edges()) os << e.src << ' ' << e.tgt << '\n';
    return os.str();
}

ArchitectureGenome ArchitectureGenome::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string magic;
    NeuronLayout layout;
    if (!(is >> magic >> layout.n_input >> layout.n_nucleus >> layout.n_output) || magic != "NNNG1")
        throw std::runtime_error("bad genome header");
    ArchitectureGenome g(layout);
    std::size_t s, t;
    while (is >> s >> t) {
        if (s >= layout.total() || t >= layout.total())
            throw std::runtime_error("genome edge index out of range");
        g.adj_[s * layout.total() + t] = 1;
    }
    return g;
}

void ArchitectureGenome::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write genome file: " + path);
    f << serialize();
}

ArchitectureGenome ArchitectureGenome::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read genome file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return deserialize(os.str());
}

} // namespace nnn
