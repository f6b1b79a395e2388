#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nnn/genome.hpp"

namespace nnn {

struct SwarmConfig {
    std::size_t swarm_size = 30;
    std::size_t iterations = 300;
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    double v_max = 4.0;
    double init_density = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Full optimizer state; serializable so a search can be checkpointed and
/// resumed without losing determinism.
struct SwarmState {
    std::vector<std::vector<std::uint8_t>> positions;
    std::vector<std::vector<double>> velocities;
    std::vector<std::vector<std::uint8_t>> pbest_positions;
    std::vector<double> pbest_scores;
    std::vector<std::uint8_t> gbest_position;
    double gbest_score = 0.0;
    std::size_t iteration = 0;
    std::string rng_state;

    void save(const std::string& path) const;
    static SwarmState load(const std::string& path);
};

struct SearchResult {
    ArchitectureGenome best;
    double best_score = 0.0;
    std::vector<double> history; // gbest score after each iteration
};

using GenomeObjective = std::function<double(const ArchitectureGenome&)>;

/// Binary PSO over the free connection slots of a layout. Velocities follow
/// v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), clipped to [-v_max,
/// v_max]; each bit resamples to 1 with probability sigmoid(v). Personal and
/// global bests are committed once per iteration after all evaluations, so
/// concurrent particle evaluation cannot change the trajectory.
SearchResult optimize(const GenomeObjective& objective, const NeuronLayout& layout,
                      const SwarmConfig& cfg, SwarmState* state = nullptr);

void write_history_csv(const std::vector<double>& history, const std::string& path);

} // namespace nnn
