// Timing comparison between the OpenMP kernels and their serial reference
// implementations: objective scoring, relevance estimation, and batched
// gradient evaluation.

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "nnn/dataset.hpp"
#include "nnn/network.hpp"
#include "nnn/objective.hpp"
#include "nnn/relevance.hpp"
#include "nnn/rng.hpp"
#include "nnn/training.hpp"

using namespace nnn;

namespace {

double now_sec() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class F>
double time_it(F&& fn, int reps) {
    const double t0 = now_sec();
    for (int i = 0; i < reps; ++i) fn();
    return (now_sec() - t0) / reps;
}

ArchitectureGenome random_genome(const NeuronLayout& layout, double density, std::uint64_t seed) {
    const auto slots = free_slots(layout);
    std::vector<std::uint8_t> bits(slots.size());
    Rng rng(seed);
    for (auto& b : bits) b = rng.bernoulli(density) ? 1 : 0;
    return ArchitectureGenome::from_slot_bits(layout, slots, bits);
}

LabeledDataset random_images(std::size_t rows, std::size_t cols, std::size_t classes,
                             std::uint64_t seed) {
    LabeledDataset d;
    d.n_rows = rows;
    d.n_cols = cols;
    d.n_classes = classes;
    d.features.resize(rows * cols);
    d.labels.assign(rows * classes, 0.0);
    Rng rng(seed);
    for (auto& v : d.features) v = rng.uniform();
    for (std::size_t r = 0; r < rows; ++r) d.labels[r * classes + rng.index(classes)] = 1.0;
    return d;
}

} // namespace

int main() {
    const NeuronLayout layout{256, 48, 10};
    const LabeledDataset data = random_images(2048, layout.n_input, layout.n_output, 7);
    const ArchitectureGenome genome = random_genome(layout, 0.5, 11);
    const RelevanceTable table = RelevanceTable::estimate(data);

    ObjectiveConfig cfg;
    cfg.data = &data;
    cfg.draw_subsample(512, 3);

    std::printf("threads available: %d\n\n", omp_get_max_threads());
    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [ms]", "openmp [ms]", "speedup");

    const double t_ser = time_it([&] { (void)score_serial(genome, table, cfg); }, 5);
    const double t_par = time_it([&] { (void)score(genome, table, cfg); }, 5);
    std::printf("%-28s %12.3f %12.3f %8.2fx\n", "objective score (512 data)", t_ser * 1e3,
                t_par * 1e3, t_ser / t_par);

    // relevance estimation: shard-parallel counting vs a single shard
    {
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        const double t1 = time_it([&] { (void)RelevanceTable::estimate(data); }, 3);
        omp_set_num_threads(saved);
        const double tn = time_it([&] { (void)RelevanceTable::estimate(data); }, 3);
        std::printf("%-28s %12.3f %12.3f %8.2fx\n", "relevance estimate", t1 * 1e3, tn * 1e3,
                    t1 / tn);
    }

    // one epoch of mini-batch backprop (batch gradients run in parallel)
    {
        const Network net = Network::init_params(genome, 13);
        TrainConfig tc;
        tc.epochs = 1;
        auto one_epoch = [&] { (void)train_bp(net, data, tc); };
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        const double t1 = time_it(one_epoch, 2);
        omp_set_num_threads(saved);
        const double tn = time_it(one_epoch, 2);
        std::printf("%-28s %12.3f %12.3f %8.2fx\n", "train_bp epoch (2048 data)", t1 * 1e3,
                    tn * 1e3, t1 / tn);
    }
    return 0;
}
