#include "nnn/objective.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nnn/rng.hpp"

namespace nnn {

void ObjectiveConfig::draw_subsample(std::size_t size, std::uint64_t seed) {
    if (!data) throw std::invalid_argument("objective config has no dataset");
    std::vector<std::size_t> all(data->n_rows);
    std::iota(all.begin(), all.end(), 0);
    if (size >= all.size()) {
        sample_indices = std::move(all);
        return;
    }
    Rng rng(seed);
    rng.shuffle(all);
    sample_indices.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
}

double expert_probability(std::span<const double> density, std::span<const double> relevance) {
    if (density.size() != relevance.size())
        throw std::invalid_argument("expert_probability: vector length mismatch");
    double dot = 0.0, nd = 0.0, nr = 0.0;
    for (std::size_t j = 0; j < density.size(); ++j) {
        dot += density[j] * relevance[j];
        nd += density[j] * density[j];
        nr += relevance[j] * relevance[j];
    }
    if (nd == 0.0 || nr == 0.0) return 0.0;
    return dot / (std::sqrt(nd) * std::sqrt(nr));
}

double density_penalty(const DensityMatrix& dm, const NeuronLayout& layout) {
    double rho = 0.0;
    for (std::size_t o = 0; o < layout.n_output; ++o) {
        std::span<const double> r = dm.row(layout.output_begin() + o);
        double n2 = 0.0;
        for (double v : r) n2 += v * v;
        rho += std::sqrt(n2);
    }
    return rho;
}

double density_penalty(const ArchitectureGenome& genome) {
    return density_penalty(compute_density(genome), genome.layout());
}

namespace {

// Product over output neurons of expert probabilities for one datum,
// evaluated in log space with the epsilon clamp.
double datum_fit(const LabeledDataset& data, std::size_t row,
                 const std::vector<std::span<const double>>& out_rows,
                 const RelevanceTable& table, double epsilon, std::vector<double>& scratch) {
    const std::size_t cls = data.label_index(row);
    double log_prod = 0.0;
    for (std::size_t i = 0; i < out_rows.size(); ++i) {
        table.relevance_vector(data.row(row), i, i == cls, scratch);
        const double p = expert_probability(out_rows[i], scratch);
        log_prod += std::log(std::max(p, epsilon));
    }
    return std::exp(log_prod);
}

std::vector<std::size_t> effective_rows(const ObjectiveConfig& cfg) {
    if (!cfg.sample_indices.empty()) return cfg.sample_indices;
    std::vector<std::size_t> all(cfg.data ? cfg.data->n_rows : 0);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

void check_cfg(const ArchitectureGenome& genome, const RelevanceTable& table,
               const ObjectiveConfig& cfg) {
    if (!cfg.data) throw std::invalid_argument("objective config has no dataset");
    if (genome.layout().n_input != table.n_input())
        throw std::invalid_argument("genome/table input count mismatch");
    if (genome.layout().n_output != table.n_output())
        throw std::invalid_argument("genome/table output count mismatch");
    if (cfg.data->n_cols != table.n_input())
        throw std::invalid_argument("dataset/table input count mismatch");
}

} // namespace

ObjectiveScore score(const ArchitectureGenome& genome, const RelevanceTable& table,
                     const ObjectiveConfig& cfg) {
    check_cfg(genome, table, cfg);
    const DensityMatrix dm = compute_density(genome);
    const NeuronLayout& L = genome.layout();
    std::vector<std::span<const double>> out_rows;
    out_rows.reserve(L.n_output);
    for (std::size_t o = 0; o < L.n_output; ++o) out_rows.push_back(dm.row(L.output_begin() + o));

    const std::vector<std::size_t> rows = effective_rows(cfg);
    std::vector<double> contrib(rows.size());
#pragma omp parallel
    {
        std::vector<double> scratch(L.n_input);
#pragma omp for schedule(static)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(rows.size()); ++k) {
            contrib[static_cast<std::size_t>(k)] =
                datum_fit(*cfg.data, rows[static_cast<std::size_t>(k)], out_rows, table,
                          cfg.epsilon, scratch);
        }
    }
    ObjectiveScore s;
    for (double c : contrib) s.fit_term += c; // fixed-order reduction
    s.penalty_term = density_penalty(dm, L);
    s.j_value = s.fit_term - cfg.lambda * s.penalty_term;
    return s;
}

ObjectiveScore score_serial(const ArchitectureGenome& genome, const RelevanceTable& table,
                            const ObjectiveConfig& cfg) {
    check_cfg(genome, table, cfg);
    const DensityMatrix dm = compute_density(genome);
    const NeuronLayout& L = genome.layout();
    std::vector<std::span<const double>> out_rows;
    out_rows.reserve(L.n_output);
    for (std::size_t o = 0; o < L.n_output; ++o) out_rows.push_back(dm.row(L.output_begin() + o));

    ObjectiveScore s;
    std::vector<double> scratch(L.n_input);
    for (std::size_t row : effective_rows(cfg)) {
        s.fit_term += datum_fit(*cfg.data, row, out_rows, table, cfg.epsilon, scratch);
    }
    s.penalty_term = density_penalty(dm, L);
    s.j_value = s.fit_term - cfg.lambda * s.penalty_term;
    return s;
}

} // namespace nnn
