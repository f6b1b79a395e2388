#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nnn/density.hpp"
#include "nnn/dataset.hpp"
#include "nnn/genome.hpp"
#include "nnn/relevance.hpp"

namespace nnn {

struct ObjectiveConfig {
    double lambda = 1.0;
    double epsilon = 1e-12; // clamp for log-space expert products
    const LabeledDataset* data = nullptr;
    // Evaluated rows; empty means the whole dataset. Fixed per search run so
    // the objective stays stationary.
    std::vector<std::size_t> sample_indices;

    /// Uniform subsample without replacement, deterministic in the seed.
    void draw_subsample(std::size_t size, std::uint64_t seed);
};

struct ObjectiveScore {
    double j_value = 0.0;
    double fit_term = 0.0;
    double penalty_term = 0.0;
};

/// Cosine similarity of two non-negative vectors; 0 when either is zero.
double expert_probability(std::span<const double> density, std::span<const double> relevance);

/// Sum over output neurons of the L2 norm of their density vectors.
double density_penalty(const ArchitectureGenome& genome);
double density_penalty(const DensityMatrix& dm, const NeuronLayout& layout);

/// fit = sum over the data sample of the product over output neurons of
/// expert probabilities (in log space, clamped at epsilon);
/// j = fit - lambda * penalty. OpenMP over the data sample with a fixed-order
/// reduction, so results are bitwise independent of thread count.
ObjectiveScore score(const ArchitectureGenome& genome, const RelevanceTable& table,
                     const ObjectiveConfig& cfg);

/// Straight-line single-thread implementation, kept as the reference the
/// parallel kernel is tested and benchmarked against.
ObjectiveScore score_serial(const ArchitectureGenome& genome, const RelevanceTable& table,
                            const ObjectiveConfig& cfg);

} // namespace nnn
