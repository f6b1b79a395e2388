#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nnn/bpso.hpp"
#include "nnn/dataset.hpp"
#include "nnn/genome.hpp"
#include "nnn/network.hpp"
#include "nnn/objective.hpp"
#include "nnn/training.hpp"

namespace nnn {

struct DatasetRef {
    std::string file;       // dataset container, or
    std::string idx_images; // IDX pair
    std::string idx_labels;
    std::size_t head = 0; // optional row limit, 0 = all

    LabeledDataset resolve() const;
};

/// Everything one end-to-end run needs. Parsed from a JSON config; unknown
/// keys are rejected, not ignored.
struct ExperimentSpec {
    NeuronLayout layout;
    DatasetRef train;
    std::vector<std::pair<std::string, DatasetRef>> tests;

    double relevance_threshold = 0.5;
    double relevance_pseudo_count = 1.0;

    double lambda = 1.0;
    double epsilon = 1e-12;
    std::size_t subsample = 512;

    SwarmConfig swarm;
    TrainConfig bp;
    TrainConfig edpm;
    Activation activation = Activation::Sigmoid;
    std::uint64_t init_seed = 1;

    std::string out_dir;

    static ExperimentSpec from_json_file(const std::string& path);
    static ExperimentSpec from_json(const std::string& text);
    std::string to_json() const;
};

struct EvalEntry {
    std::string trainer;  // "bp" | "edpm"
    std::string test_set;
    double auc = 0.0;
    double ap = 0.0;
    double ca = 0.0;
    std::string report_path;
};

struct StageLogEntry {
    std::string stage;
    std::string dataset;
    std::uint64_t dataset_hash = 0;
};

struct RunRecord {
    std::string arch; // "nnn" | "baseline"
    std::string genome_path;
    std::map<std::string, std::string> model_paths; // trainer -> path
    std::vector<EvalEntry> evals;
    std::map<std::string, double> timings_sec;
    std::size_t connection_count = 0;
    double search_score = 0.0;
    std::vector<StageLogEntry> stage_log;
    std::string config_snapshot;

    void save(const std::string& path) const;
};

/// relevance -> BPSO architecture search -> BP and EDPM training -> metrics
/// on every test set. Artifacts land in spec.out_dir; completed stages are
/// keyed by their input hashes and skipped on rerun.
RunRecord run_nnn(const ExperimentSpec& spec);

/// Same pipeline on a fixed layered genome (full bipartite connections
/// between consecutive layers); no architecture search.
RunRecord run_baseline(const ExperimentSpec& spec, const std::vector<std::size_t>& widths);

/// Table-style grid (architecture x trainer x test set) from run records.
std::string render_report_grid(const std::vector<RunRecord>& records);
void write_report_grid_csv(const std::vector<RunRecord>& records, const std::string& path);
RunRecord load_run_record(const std::string& path);

} // namespace nnn
