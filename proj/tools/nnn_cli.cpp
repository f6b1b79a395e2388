// Command-line front end: data generation, relevance estimation, architecture
// search, parameter training, evaluation, and report rendering.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nnn/bpso.hpp"
#include "nnn/dataset.hpp"
#include "nnn/density.hpp"
#include "nnn/experiment.hpp"
#include "nnn/metrics.hpp"
#include "nnn/objective.hpp"
#include "nnn/relevance.hpp"
#include "nnn/training.hpp"

namespace {

using nnn::LabeledDataset;

// Relative dataset paths fall back to $NNN_DATA_DIR when they do not resolve
// from the working directory.
std::string resolve_data_path(const std::string& path) {
    if (std::filesystem::exists(path)) return path;
    if (const char* dir = std::getenv("NNN_DATA_DIR")) {
        const std::string alt = std::string(dir) + "/" + path;
        if (std::filesystem::exists(alt)) return alt;
    }
    return path;
}

LabeledDataset load_dataset_arg(const std::string& file, const std::string& idx_images,
                                const std::string& idx_labels) {
    if (!file.empty()) return LabeledDataset::load(resolve_data_path(file));
    if (idx_images.empty() || idx_labels.empty())
        throw CLI::ValidationError("give --data FILE or both --idx-images and --idx-labels");
    return nnn::load_idx(resolve_data_path(idx_images), resolve_data_path(idx_labels));
}

void print_dataset_summary(const LabeledDataset& d) {
    double lo = 1.0, hi = 0.0;
    for (double v : d.features) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::size_t> counts(d.n_classes, 0);
    for (std::size_t r = 0; r < d.n_rows; ++r) ++counts[d.label_index(r)];
    std::cout << "rows=" << d.n_rows << " cols=" << d.n_cols << " classes=" << d.n_classes
              << " range=[" << lo << "," << hi << "] balance=";
    for (std::size_t c = 0; c < counts.size(); ++c)
        std::cout << (c ? "/" : "") << counts[c];
    std::cout << '\n';
}

nnn::ExperimentSpec load_spec(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot read config: " + config_path);
    nlohmann::json j = nlohmann::json::parse(f);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("override must look like key.path=value: " + kv);
        std::string path = "/" + kv.substr(0, eq);
        for (auto& ch : path)
            if (ch == '.') ch = '/';
        nlohmann::json value;
        const std::string raw = kv.substr(eq + 1);
        try {
            value = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error&) {
            value = raw; // plain string
        }
        j[nlohmann::json::json_pointer(path)] = value;
    }
    return nnn::ExperimentSpec::from_json(j.dump());
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Nucleus neural network toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate or corrupt a dataset");
    std::string gen_kind, gen_out, gen_patch_dir, gen_src_file, gen_src_img, gen_src_lab;
    std::size_t gen_count = 1000;
    std::uint64_t gen_seed = 1;
    gen->add_option("kind", gen_kind, "toy-arch | toy-param | bg-rand | bg-img")->required();
    gen->add_option("count", gen_count, "row count (toy kinds) or head limit (corruptions)");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output dataset file")->required();
    gen->add_option("--patch-dir", gen_patch_dir, "directory of .pgm patches (bg-img)");
    gen->add_option("--source-file", gen_src_file, "clean source dataset (corruptions)");
    gen->add_option("--source-idx-images", gen_src_img);
    gen->add_option("--source-idx-labels", gen_src_lab);

    // relevance
    auto* rel = app.add_subcommand("relevance", "Estimate the NPMI relevance table");
    std::string rel_file, rel_img, rel_lab, rel_out;
    double rel_threshold = 0.5, rel_pseudo = 1.0;
    rel->add_option("--data", rel_file, "dataset container file");
    rel->add_option("--idx-images", rel_img);
    rel->add_option("--idx-labels", rel_lab);
    rel->add_option("--threshold", rel_threshold);
    rel->add_option("--pseudo-count", rel_pseudo);
    rel->add_option("--out", rel_out, "NPMI table CSV")->required();

    // search
    auto* search = app.add_subcommand("search", "BPSO architecture search");
    std::string search_config;
    std::vector<std::string> search_overrides;
    bool search_resume = false;
    search->add_option("--config", search_config)->required();
    search->add_option("--set", search_overrides, "config overrides key.path=value");
    search->add_flag("--resume", search_resume, "resume from the checkpoint in out_dir");

    // train
    auto* train = app.add_subcommand("train", "Train a genome on a dataset");
    std::string train_config, train_genome, train_trainer = "bp", train_out;
    std::vector<std::string> train_overrides;
    train->add_option("--config", train_config)->required();
    train->add_option("--set", train_overrides, "config overrides key.path=value");
    train->add_option("--genome", train_genome, "genome file (defaults to the searched one)");
    train->add_option("--trainer", train_trainer, "bp | edpm");
    train->add_option("--out", train_out, "model output path");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a model on a test set");
    std::string eval_model, eval_file, eval_img, eval_lab, eval_out, eval_curves;
    eval->add_option("--model", eval_model)->required();
    eval->add_option("--data", eval_file);
    eval->add_option("--idx-images", eval_img);
    eval->add_option("--idx-labels", eval_lab);
    eval->add_option("--out", eval_out, "report JSON path");
    eval->add_option("--curves", eval_curves, "curves CSV path");

    // report
    auto* report = app.add_subcommand("report", "Render a grid from run records");
    std::vector<std::string> report_records;
    std::string report_csv;
    report->add_option("--records", report_records, "record.json paths")->required();
    report->add_option("--csv", report_csv, "also write the grid as CSV");

    // run
    auto* run = app.add_subcommand("run", "Full pipeline from an experiment config");
    std::string run_config;
    std::vector<std::string> run_overrides;
    std::vector<std::size_t> run_baseline_widths;
    run->add_option("--config", run_config)->required();
    run->add_option("--set", run_overrides, "config overrides key.path=value");
    run->add_option("--baseline", run_baseline_widths,
                    "also run a layered baseline with these widths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ? 0 : 1;
    }

    if (gen->parsed()) {
        LabeledDataset out;
        if (gen_kind == "toy-arch") {
            out = nnn::gen_toy_arch(gen_count, gen_seed);
        } else if (gen_kind == "toy-param") {
            out = nnn::gen_toy_param(gen_count, gen_seed);
        } else if (gen_kind == "bg-rand" || gen_kind == "bg-img") {
            LabeledDataset src = load_dataset_arg(gen_src_file, gen_src_img, gen_src_lab);
            if (gen_count && gen_count < src.n_rows) src = src.head(gen_count);
            if (gen_kind == "bg-rand") {
                out = nnn::corrupt_bg_rand(src, gen_seed);
            } else {
                if (gen_patch_dir.empty())
                    throw CLI::ValidationError("bg-img needs --patch-dir");
                out = nnn::corrupt_bg_img(src, nnn::load_patch_pool(gen_patch_dir), gen_seed);
            }
        } else {
            throw CLI::ValidationError("unknown kind: " + gen_kind);
        }
        out.save(gen_out);
        print_dataset_summary(out);
        return 0;
    }

    if (rel->parsed()) {
        const LabeledDataset data = load_dataset_arg(rel_file, rel_img, rel_lab);
        const auto table = nnn::RelevanceTable::estimate(data, rel_threshold, rel_pseudo);
        table.export_csv(rel_out);
        std::cout << "relevance table " << table.n_input() << "x" << table.n_output()
                  << " hash=" << std::hex << table.hash() << std::dec << '\n';
        return 0;
    }

    if (search->parsed()) {
        const auto spec = load_spec(search_config, search_overrides);
        std::filesystem::create_directories(spec.out_dir);
        const LabeledDataset data = spec.train.resolve();
        const auto table =
            nnn::RelevanceTable::estimate(data, spec.relevance_threshold, spec.relevance_pseudo_count);
        nnn::ObjectiveConfig obj;
        obj.lambda = spec.lambda;
        obj.epsilon = spec.epsilon;
        obj.data = &data;
        obj.draw_subsample(spec.subsample, spec.swarm.seed);

        const std::string ckpt = spec.out_dir + "/swarm_checkpoint.txt";
        const std::string history_path = spec.out_dir + "/search_history.csv";
        nnn::SwarmState state;
        std::vector<double> history;
        if (search_resume) {
            state = nnn::SwarmState::load(ckpt);
            std::ifstream h(history_path);
            std::string line;
            std::getline(h, line); // header
            while (std::getline(h, line)) {
                const auto comma = line.find(',');
                if (comma != std::string::npos) history.push_back(std::stod(line.substr(comma + 1)));
            }
        }
        const auto result = nnn::optimize(
            [&](const nnn::ArchitectureGenome& g) { return nnn::score(g, table, obj).j_value; },
            spec.layout, spec.swarm, &state);
        history.insert(history.end(), result.history.begin(), result.history.end());
        state.save(ckpt);
        nnn::write_history_csv(history, history_path);
        result.best.save(spec.out_dir + "/genome.txt");
        {
            std::ofstream f(spec.out_dir + "/genome.txt.meta");
            f.precision(17);
            f << "score " << result.best_score << "\nrelevance_hash " << std::hex << table.hash()
              << std::dec << '\n';
        }
        std::cout << "gbest=" << result.best_score
                  << " connections=" << result.best.n_connections() << " iterations="
                  << state.iteration << '\n';
        return 0;
    }

    if (train->parsed()) {
        const auto spec = load_spec(train_config, train_overrides);
        std::filesystem::create_directories(spec.out_dir);
        const LabeledDataset data = spec.train.resolve();
        const std::string genome_path =
            train_genome.empty() ? spec.out_dir + "/genome.txt" : train_genome;
        const auto genome = nnn::ArchitectureGenome::load(genome_path);
        const auto init = nnn::Network::init_params(genome, spec.init_seed, spec.activation);
        nnn::TrainResult result;
        if (train_trainer == "bp") {
            result = nnn::train_bp(init, data, spec.bp);
        } else if (train_trainer == "edpm") {
            result = nnn::train_edpm(init, data, spec.edpm);
        } else {
            throw CLI::ValidationError("trainer must be bp or edpm");
        }
        const std::string out =
            train_out.empty() ? spec.out_dir + "/model_" + train_trainer + ".bin" : train_out;
        result.net.save(out, {{"trainer", train_trainer}});
        nnn::write_loss_csv(result.loss_history,
                            spec.out_dir + "/loss_" + train_trainer + ".csv");
        std::cout << "final_loss=" << result.loss_history.back() << " model=" << out << '\n';
        return 0;
    }

    if (eval->parsed()) {
        const auto net = nnn::Network::load(eval_model);
        const LabeledDataset data = load_dataset_arg(eval_file, eval_img, eval_lab);
        std::vector<double> scores(data.n_rows * data.n_classes);
        for (std::size_t r = 0; r < data.n_rows; ++r) {
            const auto out = net.predict(data.row(r));
            std::copy(out.begin(), out.end(), scores.begin() + static_cast<std::ptrdiff_t>(r * data.n_classes));
        }
        const auto rep = nnn::macro_report(scores, data);
        if (!eval_out.empty()) rep.save_json(eval_out);
        if (!eval_curves.empty()) rep.export_curves_csv(eval_curves);
        std::cout << "auc=" << rep.auc << " ap=" << rep.ap << " ca=" << rep.ca << '\n';
        return 0;
    }

    if (report->parsed()) {
        std::vector<nnn::RunRecord> records;
        records.reserve(report_records.size());
        for (const auto& path : report_records) records.push_back(nnn::load_run_record(path));
        std::cout << nnn::render_report_grid(records);
        if (!report_csv.empty()) nnn::write_report_grid_csv(records, report_csv);
        return 0;
    }

    if (run->parsed()) {
        const auto spec = load_spec(run_config, run_overrides);
        std::vector<nnn::RunRecord> records;
        records.push_back(nnn::run_nnn(spec));
        if (!run_baseline_widths.empty())
            records.push_back(nnn::run_baseline(spec, run_baseline_widths));
        std::cout << nnn::render_report_grid(records);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
