#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nnn/dataset.hpp"
#include "nnn/network.hpp"

namespace nnn {

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    // negative sampling (EDPM only)
    std::size_t n_samples = 5;
    std::size_t sample_steps = 30;
    double sample_step_size = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

struct NegativeSample {
    std::vector<double> x;
    std::size_t steps_used = 0;
};

struct TrainResult {
    Network net;
    std::vector<double> loss_history; // mean E per epoch
};

/// Mini-batch gradient descent on the mean squared-error energy.
TrainResult train_bp(const Network& net, const LabeledDataset& data, const TrainConfig& cfg);

/// One gradient-ascent trajectory of x_hat <- clamp(x_hat + step *
/// exp(-E(x_hat)) * d(-E)/dx_hat), theta frozen, started uniform on [0,1]^n.
NegativeSample sample_negative(const Network& net, std::span<const double> y,
                               const TrainConfig& cfg, class Rng& rng);

/// Energy-based trainer: per datum the positive phase uses d(-E(x,y))/dtheta
/// and the negative phase averages d(-E(x_hat,y))/dtheta over sampled
/// trajectories conditioned on the same label; theta ascends their
/// difference. Trajectories are shared across batch members with the same
/// label.
TrainResult train_edpm(const Network& net, const LabeledDataset& data, const TrainConfig& cfg);

/// One EDPM batch step against caller-supplied negative samples, exposed so
/// the update rule is testable with frozen trajectories. rows indexes into
/// `data`; negatives maps a class index to its shared sample set.
void edpm_batch_update(Network& net, const LabeledDataset& data,
                       std::span<const std::size_t> rows,
                       const std::map<std::size_t, std::vector<std::vector<double>>>& negatives,
                       double learning_rate);

void write_loss_csv(const std::vector<double>& history, const std::string& path);

} // namespace nnn
