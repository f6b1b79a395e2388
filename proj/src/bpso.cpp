#include "nnn/bpso.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nnn/rng.hpp"

namespace nnn {

void SwarmConfig::validate() const {
    if (swarm_size < 2) throw std::invalid_argument("swarm_size must be >= 2");
    if (v_max <= 0.0) throw std::invalid_argument("v_max must be positive");
    if (cognitive < 0.0 || social < 0.0) throw std::invalid_argument("c1/c2 must be >= 0");
    if (init_density < 0.0 || init_density > 1.0)
        throw std::invalid_argument("init_density must be in [0,1]");
}

namespace {

std::vector<double> evaluate_all(const GenomeObjective& objective, const NeuronLayout& layout,
                                 const std::vector<Edge>& slots,
                                 const std::vector<std::vector<std::uint8_t>>& positions) {
    std::vector<double> scores(positions.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(positions.size()); ++p) {
        const auto genome =
            ArchitectureGenome::from_slot_bits(layout, slots, positions[static_cast<std::size_t>(p)]);
        scores[static_cast<std::size_t>(p)] = objective(genome);
    }
    return scores;
}

} // namespace

SearchResult optimize(const GenomeObjective& objective, const NeuronLayout& layout,
                      const SwarmConfig& cfg, SwarmState* external_state) {
    cfg.validate();
    const std::vector<Edge> slots = free_slots(layout);
    const std::size_t dims = slots.size();

    SwarmState local;
    SwarmState& st = external_state ? *external_state : local;
    Rng rng(cfg.seed);

    if (st.positions.empty()) {
        st.positions.assign(cfg.swarm_size, std::vector<std::uint8_t>(dims, 0));
        st.velocities.assign(cfg.swarm_size, std::vector<double>(dims, 0.0));
        for (auto& pos : st.positions)
            for (auto& bit : pos) bit = rng.bernoulli(cfg.init_density) ? 1 : 0;
        const std::vector<double> scores = evaluate_all(objective, layout, slots, st.positions);
        st.pbest_positions = st.positions;
        st.pbest_scores = scores;
        std::size_t best = 0;
        for (std::size_t p = 1; p < cfg.swarm_size; ++p)
            if (scores[p] > scores[best]) best = p;
        st.gbest_position = st.positions[best];
        st.gbest_score = scores[best];
        st.iteration = 0;
    } else {
        if (st.positions.size() != cfg.swarm_size || st.positions[0].size() != dims)
            throw std::invalid_argument("checkpoint does not match swarm config / layout");
        rng.load_state(st.rng_state);
    }

    SearchResult result;
    for (std::size_t it = st.iteration; it < cfg.iterations; ++it) {
        for (std::size_t p = 0; p < cfg.swarm_size; ++p) {
            auto& v = st.velocities[p];
            auto& x = st.positions[p];
            for (std::size_t d = 0; d < dims; ++d) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double vd = cfg.inertia * v[d] +
                            cfg.cognitive * r1 * (st.pbest_positions[p][d] - x[d]) +
                            cfg.social * r2 * (st.gbest_position[d] - x[d]);
                vd = std::clamp(vd, -cfg.v_max, cfg.v_max);
                v[d] = vd;
                x[d] = rng.uniform() < 1.0 / (1.0 + std::exp(-vd)) ? 1 : 0;
            }
        }
        const std::vector<double> scores = evaluate_all(objective, layout, slots, st.positions);
        for (std::size_t p = 0; p < cfg.swarm_size; ++p) {
            if (scores[p] > st.pbest_scores[p]) {
                st.pbest_scores[p] = scores[p];
                st.pbest_positions[p] = st.positions[p];
            }
        }
        for (std::size_t p = 0; p < cfg.swarm_size; ++p) {
            if (st.pbest_scores[p] > st.gbest_score) {
                st.gbest_score = st.pbest_scores[p];
                st.gbest_position = st.pbest_positions[p];
            }
        }
        st.iteration = it + 1;
        result.history.push_back(st.gbest_score);
    }
    st.rng_state = rng.save_state();

    result.best = ArchitectureGenome::from_slot_bits(layout, slots, st.gbest_position);
    result.best_score = st.gbest_score;
    return result;
}

void write_history_csv(const std::vector<double>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write history csv: " + path);
    f.precision(17);
    f << "iteration,gbest\n";
    for (std::size_t i = 0; i < history.size(); ++i) f << i + 1 << ',' << history[i] << '\n';
}

namespace {

void write_bits(std::ostream& os, const std::vector<std::uint8_t>& bits) {
    for (std::uint8_t b : bits) os << char('0' + b);
    os << '\n';
}

std::vector<std::uint8_t> read_bits(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("truncated swarm checkpoint");
    std::vector<std::uint8_t> bits(line.size());
    for (std::size_t i = 0; i < line.size(); ++i) bits[i] = line[i] == '1' ? 1 : 0;
    return bits;
}

} // namespace

void SwarmState::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write swarm checkpoint: " + path);
    f.precision(17);
    f << "NNNSWARM1 " << positions.size() << ' ' << (positions.empty() ? 0 : positions[0].size())
      << ' ' << iteration << '\n';
    f << gbest_score << '\n';
    write_bits(f, gbest_position);
    for (std::size_t p = 0; p < positions.size(); ++p) {
        write_bits(f, positions[p]);
        write_bits(f, pbest_positions[p]);
        f << pbest_scores[p] << '\n';
        for (std::size_t d = 0; d < velocities[p].size(); ++d)
            f << velocities[p][d] << (d + 1 == velocities[p].size() ? '\n' : ' ');
    }
    f << rng_state << '\n';
}

SwarmState SwarmState::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read swarm checkpoint: " + path);
    std::string magic;
    std::size_t n_particles = 0, dims = 0;
    SwarmState st;
    f >> magic >> n_particles >> dims >> st.iteration;
    if (magic != "NNNSWARM1") throw std::runtime_error("bad swarm checkpoint header: " + path);
    f >> st.gbest_score;
    f.ignore();
    st.gbest_position = read_bits(f);
    st.positions.resize(n_particles);
    st.pbest_positions.resize(n_particles);
    st.pbest_scores.resize(n_particles);
    st.velocities.assign(n_particles, std::vector<double>(dims));
    for (std::size_t p = 0; p < n_particles; ++p) {
        st.positions[p] = read_bits(f);
        st.pbest_positions[p] = read_bits(f);
        f >> st.pbest_scores[p];
        for (std::size_t d = 0; d < dims; ++d) f >> st.velocities[p][d];
        f.ignore();
    }
    std::getline(f, st.rng_state);
    if (st.rng_state.empty()) throw std::runtime_error("swarm checkpoint missing rng state: " + path);
    return st;
}

} // namespace nnn
