#include "nnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nnn/rng.hpp"

namespace nnn {

void TrainConfig::validate() const {
    // rate 0 is allowed: a no-op trainer is a useful control
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (epochs == 0 || batch_size == 0) throw std::invalid_argument("epochs/batch_size must be positive");
    if (n_samples == 0 || sample_steps == 0) throw std::invalid_argument("sampler counts must be positive");
    if (sample_step_size <= 0.0) throw std::invalid_argument("sample_step_size must be positive");
}

namespace {

void check_dims(const Network& net, const LabeledDataset& data) {
    if (net.layout().n_input != data.n_cols)
        throw std::invalid_argument("network/dataset input dimension mismatch");
    if (net.layout().n_output != data.n_classes)
        throw std::invalid_argument("network/dataset output dimension mismatch");
}

double energy_from_activations(const NeuronLayout& L, std::span<const double> a,
                               std::span<const double> y) {
    double e = 0.0;
    for (std::size_t o = 0; o < L.n_output; ++o) {
        const double d = y[o] - a[L.output_begin() + o];
        e += d * d;
    }
    return e;
}

} // namespace

TrainResult train_bp(const Network& net, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    check_dims(net, data);
    TrainResult result{net, {}};
    Network& model = result.net;
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(data.n_rows);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            const std::size_t bsz = end - begin;
            std::vector<Gradients> grads(bsz);
            std::vector<double> losses(bsz);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(bsz); ++k) {
                const std::size_t row = order[begin + static_cast<std::size_t>(k)];
                const std::vector<double> a = model.forward(data.row(row));
                losses[static_cast<std::size_t>(k)] =
                    energy_from_activations(model.layout(), a, data.label_row(row));
                model.backward(a, data.label_row(row), grads[static_cast<std::size_t>(k)], nullptr);
            }
            const double scale = cfg.learning_rate / static_cast<double>(bsz);
            for (std::size_t k = 0; k < bsz; ++k) {
                epoch_loss += losses[k];
                for (std::size_t w = 0; w < model.n_weights(); ++w)
                    model.weights()[w] -= scale * grads[k].weights[w];
                for (std::size_t b = 0; b < model.n_biases(); ++b)
                    model.biases()[b] -= scale * grads[k].biases[b];
            }
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(data.n_rows));
    }
    return result;
}

NegativeSample sample_negative(const Network& net, std::span<const double> y,
                               const TrainConfig& cfg, Rng& rng) {
    const NeuronLayout& L = net.layout();
    NegativeSample s;
    s.x.resize(L.n_input);
    for (double& v : s.x) v = rng.uniform();
    Gradients scratch;
    std::vector<double> gx;
    for (std::size_t step = 0; step < cfg.sample_steps; ++step) {
        const std::vector<double> a = net.forward(s.x);
        const double e = energy_from_activations(L, a, y);
        net.backward(a, y, scratch, &gx);
        const double w = std::exp(-e);
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            s.x[j] = std::clamp(s.x[j] + cfg.sample_step_size * w * gx[j], 0.0, 1.0);
        }
        ++s.steps_used;
    }
    return s;
}

void edpm_batch_update(Network& net, const LabeledDataset& data,
                       std::span<const std::size_t> rows,
                       const std::map<std::size_t, std::vector<std::vector<double>>>& negatives,
                       double learning_rate) {
    check_dims(net, data);
    const std::size_t bsz = rows.size();
    if (bsz == 0) return;

    // Negative-phase gradient per label, averaged over its trajectories.
    std::map<std::size_t, Gradients> neg_grad;
    for (const auto& [cls, samples] : negatives) {
        if (samples.empty()) throw std::invalid_argument("empty negative sample set");
        std::vector<double> y(data.n_classes, 0.0);
        y[cls] = 1.0;
        Gradients acc;
        acc.weights.assign(net.n_weights(), 0.0);
        acc.biases.assign(net.n_biases(), 0.0);
        std::vector<Gradients> per(samples.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(samples.size()); ++k) {
            per[static_cast<std::size_t>(k)] =
                net.param_gradient(samples[static_cast<std::size_t>(k)], y);
        }
        const double inv = 1.0 / static_cast<double>(samples.size());
        for (const Gradients& g : per) {
            for (std::size_t w = 0; w < acc.weights.size(); ++w) acc.weights[w] += inv * g.weights[w];
            for (std::size_t b = 0; b < acc.biases.size(); ++b) acc.biases[b] += inv * g.biases[b];
        }
        neg_grad.emplace(cls, std::move(acc));
    }

    std::vector<Gradients> pos(bsz);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(bsz); ++k) {
        const std::size_t row = rows[static_cast<std::size_t>(k)];
        pos[static_cast<std::size_t>(k)] = net.param_gradient(data.row(row), data.label_row(row));
    }

    // theta += lr * mean(g+ - g-); param_gradient returns dE/dtheta, and
    // g = d(-E)/dtheta, so the signs flip.
    const double scale = learning_rate / static_cast<double>(bsz);
    for (std::size_t k = 0; k < bsz; ++k) {
        const Gradients& gn = neg_grad.at(data.label_index(rows[k]));
        for (std::size_t w = 0; w < net.n_weights(); ++w)
            net.weights()[w] += scale * (-pos[k].weights[w] + gn.weights[w]);
        for (std::size_t b = 0; b < net.n_biases(); ++b)
            net.biases()[b] += scale * (-pos[k].biases[b] + gn.biases[b]);
    }
}

TrainResult train_edpm(const Network& net, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    check_dims(net, data);
    TrainResult result{net, {}};
    Network& model = result.net;
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(data.n_rows);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batch_id = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_id) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            const std::span<const std::size_t> rows(order.data() + begin, end - begin);

            std::set<std::size_t> classes;
            for (std::size_t row : rows) {
                epoch_loss += model.energy(data.row(row), data.label_row(row));
                classes.insert(data.label_index(row));
            }

            // Trajectories are shared within the batch per label; seeds are
            // derived per (epoch, batch, label, sample) so evaluation order
            // does not matter.
            const std::vector<std::size_t> cls_list(classes.begin(), classes.end());
            std::map<std::size_t, std::vector<std::vector<double>>> negatives;
            for (std::size_t cls : cls_list)
                negatives[cls].resize(cfg.n_samples);
#pragma omp parallel for collapse(2) schedule(static)
            for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cls_list.size()); ++c) {
                for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(cfg.n_samples); ++s) {
                    const std::size_t cls = cls_list[static_cast<std::size_t>(c)];
                    std::vector<double> y(data.n_classes, 0.0);
                    y[cls] = 1.0;
                    Rng traj_rng(mix_seed(cfg.seed, (epoch << 20) + batch_id,
                                          (cls << 20) + static_cast<std::size_t>(s)));
                    negatives.at(cls)[static_cast<std::size_t>(s)] =
                        sample_negative(model, y, cfg, traj_rng).x;
                }
            }
            edpm_batch_update(model, data, rows, negatives, cfg.learning_rate);
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(data.n_rows));
    }
    return result;
}

void write_loss_csv(const std::vector<double>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write loss csv: " + path);
    f.precision(17);
    f << "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) f << i + 1 << ',' << history[i] << '\n';
}

} // namespace nnn
