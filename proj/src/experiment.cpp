#include "nnn/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nnn/metrics.hpp"
#include "nnn/relevance.hpp"
#include "nnn/rng.hpp"

namespace nnn {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw std::invalid_argument("unknown config key '" + key + "' in " + where);
    }
}

DatasetRef parse_dataset_ref(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"file", "idx_images", "idx_labels", "head"}, where);
    DatasetRef ref;
    ref.file = j.value("file", "");
    ref.idx_images = j.value("idx_images", "");
    ref.idx_labels = j.value("idx_labels", "");
    ref.head = j.value("head", 0);
    if (ref.file.empty() == (ref.idx_images.empty() || ref.idx_labels.empty()))
        throw std::invalid_argument(where + ": give either 'file' or an 'idx_images'/'idx_labels' pair");
    return ref;
}

json dataset_ref_json(const DatasetRef& ref) {
    json j;
    if (!ref.file.empty()) j["file"] = ref.file;
    if (!ref.idx_images.empty()) {
        j["idx_images"] = ref.idx_images;
        j["idx_labels"] = ref.idx_labels;
    }
    if (ref.head) j["head"] = ref.head;
    return j;
}

void parse_train_config(const json& j, TrainConfig& cfg, bool sampler, const std::string& where) {
    std::set<std::string> allowed = {"learning_rate", "epochs", "batch_size", "seed"};
    if (sampler) {
        allowed.insert({"n_samples", "sample_steps", "sample_step_size"});
    }
    reject_unknown_keys(j, allowed, where);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    if (sampler) {
        cfg.n_samples = j.value("n_samples", cfg.n_samples);
        cfg.sample_steps = j.value("sample_steps", cfg.sample_steps);
        cfg.sample_step_size = j.value("sample_step_size", cfg.sample_step_size);
    }
    cfg.validate();
}

} // namespace

LabeledDataset DatasetRef::resolve() const {
    LabeledDataset d = !file.empty() ? LabeledDataset::load(file) : load_idx(idx_images, idx_labels);
    if (head && head < d.n_rows) d = d.head(head);
    return d;
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read experiment config: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return from_json(os.str());
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
    const json j = json::parse(text);
    reject_unknown_keys(j,
                        {"layout", "train", "tests", "relevance", "objective", "swarm", "train_bp",
                         "train_edpm", "activation", "init_seed", "out_dir"},
                        "config root");
    ExperimentSpec spec;

    const json& jl = j.at("layout");
    reject_unknown_keys(jl, {"n_input", "n_nucleus", "n_output"}, "layout");
    spec.layout = {jl.at("n_input").get<std::size_t>(), jl.at("n_nucleus").get<std::size_t>(),
                   jl.at("n_output").get<std::size_t>()};
    if (spec.layout.n_input < 1 || spec.layout.n_nucleus < 1 || spec.layout.n_output < 1)
        throw std::invalid_argument("layout counts must all be >= 1");

    spec.train = parse_dataset_ref(j.at("train"), "train");
    if (j.contains("tests")) {
        for (const auto& [name, ref] : j.at("tests").items()) {
            spec.tests.emplace_back(name, parse_dataset_ref(ref, "tests." + name));
        }
    }

    if (j.contains("relevance")) {
        const json& jr = j.at("relevance");
        reject_unknown_keys(jr, {"threshold", "pseudo_count"}, "relevance");
        spec.relevance_threshold = jr.value("threshold", spec.relevance_threshold);
        spec.relevance_pseudo_count = jr.value("pseudo_count", spec.relevance_pseudo_count);
    }
    if (j.contains("objective")) {
        const json& jo = j.at("objective");
        reject_unknown_keys(jo, {"lambda", "epsilon", "subsample"}, "objective");
        spec.lambda = jo.value("lambda", spec.lambda);
        spec.epsilon = jo.value("epsilon", spec.epsilon);
        spec.subsample = jo.value("subsample", spec.subsample);
        if (spec.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
        if (spec.epsilon <= 0.0 || spec.epsilon > 1e-3)
            throw std::invalid_argument("epsilon must be in (0, 1e-3]");
    }
    if (j.contains("swarm")) {
        const json& js = j.at("swarm");
        reject_unknown_keys(js,
                            {"swarm_size", "iterations", "inertia", "cognitive", "social", "v_max",
                             "init_density", "seed"},
                            "swarm");
        spec.swarm.swarm_size = js.value("swarm_size", spec.swarm.swarm_size);
        spec.swarm.iterations = js.value("iterations", spec.swarm.iterations);
        spec.swarm.inertia = js.value("inertia", spec.swarm.inertia);
        spec.swarm.cognitive = js.value("cognitive", spec.swarm.cognitive);
        spec.swarm.social = js.value("social", spec.swarm.social);
        spec.swarm.v_max = js.value("v_max", spec.swarm.v_max);
        spec.swarm.init_density = js.value("init_density", spec.swarm.init_density);
        spec.swarm.seed = js.value("seed", spec.swarm.seed);
        spec.swarm.validate();
    }
    if (j.contains("train_bp")) parse_train_config(j.at("train_bp"), spec.bp, false, "train_bp");
    spec.edpm.learning_rate = 0.02;
    if (j.contains("train_edpm")) parse_train_config(j.at("train_edpm"), spec.edpm, true, "train_edpm");
    if (j.contains("activation")) spec.activation = activation_from_name(j.at("activation"));
    spec.init_seed = j.value("init_seed", spec.init_seed);
    spec.out_dir = j.value("out_dir", std::string("nnn-run"));
    return spec;
}

std::string ExperimentSpec::to_json() const {
    json j;
    j["layout"] = {{"n_input", layout.n_input},
                   {"n_nucleus", layout.n_nucleus},
                   {"n_output", layout.n_output}};
    j["train"] = dataset_ref_json(train);
    json jt = json::object();
    for (const auto& [name, ref] : tests) jt[name] = dataset_ref_json(ref);
    j["tests"] = jt;
    j["relevance"] = {{"threshold", relevance_threshold}, {"pseudo_count", relevance_pseudo_count}};
    j["objective"] = {{"lambda", lambda}, {"epsilon", epsilon}, {"subsample", subsample}};
    j["swarm"] = {{"swarm_size", swarm.swarm_size}, {"iterations", swarm.iterations},
                  {"inertia", swarm.inertia},       {"cognitive", swarm.cognitive},
                  {"social", swarm.social},         {"v_max", swarm.v_max},
                  {"init_density", swarm.init_density}, {"seed", swarm.seed}};
    j["train_bp"] = {{"learning_rate", bp.learning_rate},
                     {"epochs", bp.epochs},
                     {"batch_size", bp.batch_size},
                     {"seed", bp.seed}};
    j["train_edpm"] = {{"learning_rate", edpm.learning_rate},
                       {"epochs", edpm.epochs},
                       {"batch_size", edpm.batch_size},
                       {"seed", edpm.seed},
                       {"n_samples", edpm.n_samples},
                       {"sample_steps", edpm.sample_steps},
                       {"sample_step_size", edpm.sample_step_size}};
    j["activation"] = activation_name(activation);
    j["init_seed"] = init_seed;
    j["out_dir"] = out_dir;
    return j.dump(2);
}

namespace {

class StageTimer {
public:
    StageTimer(RunRecord& rec, std::string name) : rec_(rec), name_(std::move(name)) {
        t0_ = std::chrono::steady_clock::now();
    }
    ~StageTimer() {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        rec_.timings_sec[name_] = std::chrono::duration<double>(dt).count();
    }

private:
    RunRecord& rec_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

// Content-addressed stage skip: an artifact is valid when the key file next
// to it holds the hash of this run's stage inputs.
bool stage_cached(const std::string& artifact, std::uint64_t key) {
    std::ifstream f(artifact + ".key");
    std::string stored;
    return f && std::filesystem::exists(artifact) && (f >> stored) && stored == hex64(key);
}

void write_stage_key(const std::string& artifact, std::uint64_t key) {
    std::ofstream f(artifact + ".key");
    f << hex64(key) << '\n';
}

std::vector<double> score_matrix(const Network& net, const LabeledDataset& data) {
    std::vector<double> scores(data.n_rows * data.n_classes);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(data.n_rows); ++r) {
        const std::vector<double> out = net.predict(data.row(static_cast<std::size_t>(r)));
        for (std::size_t c = 0; c < data.n_classes; ++c)
            scores[static_cast<std::size_t>(r) * data.n_classes + c] = out[c];
    }
    return scores;
}

std::uint64_t hash_str(const std::string& s, std::uint64_t h0 = 1469598103934665603ULL) {
    std::uint64_t h = h0;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

RunRecord run_pipeline(const ExperimentSpec& spec, const std::string& arch,
                       const ArchitectureGenome* fixed_genome) {
    RunRecord rec;
    rec.arch = arch;
    rec.config_snapshot = spec.to_json();
    std::filesystem::create_directories(spec.out_dir);
    const std::string prefix = spec.out_dir + "/" + arch + "_";

    LabeledDataset train = spec.train.resolve();
    if (train.n_cols != spec.layout.n_input || train.n_classes != spec.layout.n_output)
        throw std::runtime_error("training data does not match layout");

    ArchitectureGenome genome;
    rec.genome_path = prefix + "genome.txt";
    if (fixed_genome) {
        genome = *fixed_genome;
        genome.save(rec.genome_path);
        rec.search_score = 0.0;
    } else {
        RelevanceTable table;
        {
            StageTimer t(rec, "relevance");
            table = RelevanceTable::estimate(train, spec.relevance_threshold,
                                             spec.relevance_pseudo_count);
            rec.stage_log.push_back({"relevance", "train", train.hash()});
        }
        ObjectiveConfig obj;
        obj.lambda = spec.lambda;
        obj.epsilon = spec.epsilon;
        obj.data = &train;
        obj.draw_subsample(spec.subsample, spec.swarm.seed);

        const std::uint64_t search_key =
            hash_str(spec.to_json(), table.hash() ^ train.hash() ^ 0x5ea2c4ULL);
        if (stage_cached(rec.genome_path, search_key)) {
            genome = ArchitectureGenome::load(rec.genome_path);
            std::ifstream f(rec.genome_path + ".score");
            f >> rec.search_score;
        } else {
            StageTimer t(rec, "search");
            rec.stage_log.push_back({"search", "train", train.hash()});
            const SearchResult res = optimize(
                [&](const ArchitectureGenome& g) { return score(g, table, obj).j_value; },
                spec.layout, spec.swarm);
            genome = res.best;
            rec.search_score = res.best_score;
            genome.save(rec.genome_path);
            std::ofstream f(rec.genome_path + ".score");
            f.precision(17);
            f << res.best_score << '\n';
            write_history_csv(res.history, prefix + "search_history.csv");
            write_stage_key(rec.genome_path, search_key);
        }
    }
    rec.connection_count = genome.n_connections();

    const Network init = Network::init_params(genome, spec.init_seed, spec.activation);
    for (const std::string trainer : {"bp", "edpm"}) {
        const std::string model_path = prefix + "model_" + trainer + ".bin";
        rec.model_paths[trainer] = model_path;
        const std::uint64_t key =
            hash_str(spec.to_json(), genome.hash() ^ train.hash() ^ hash_str(trainer));
        if (stage_cached(model_path, key)) continue;
        StageTimer t(rec, "train_" + trainer);
        rec.stage_log.push_back({"train_" + trainer, "train", train.hash()});
        const TrainResult res = trainer == std::string("bp") ? train_bp(init, train, spec.bp)
                                                             : train_edpm(init, train, spec.edpm);
        res.net.save(model_path, {{"trainer", trainer},
                                  {"arch", arch},
                                  {"seed", std::to_string(trainer == std::string("bp")
                                                              ? spec.bp.seed
                                                              : spec.edpm.seed)}});
        write_loss_csv(res.loss_history, prefix + "loss_" + trainer + ".csv");
        write_stage_key(model_path, key);
    }

    {
        StageTimer t(rec, "eval");
        for (const auto& [test_name, ref] : spec.tests) {
            const LabeledDataset test = ref.resolve();
            rec.stage_log.push_back({"eval", test_name, test.hash()});
            for (const std::string trainer : {"bp", "edpm"}) {
                const Network net = Network::load(rec.model_paths.at(trainer));
                const EvalReport rep = macro_report(score_matrix(net, test), test);
                const std::string rep_path = prefix + "report_" + trainer + "_" + test_name + ".json";
                rep.save_json(rep_path);
                rep.export_curves_csv(prefix + "curves_" + trainer + "_" + test_name + ".csv");
                rec.evals.push_back({trainer, test_name, rep.auc, rep.ap, rep.ca, rep_path});
            }
        }
    }

    rec.save(prefix + "record.json");
    return rec;
}

} // namespace

RunRecord run_nnn(const ExperimentSpec& spec) { return run_pipeline(spec, "nnn", nullptr); }

RunRecord run_baseline(const ExperimentSpec& spec, const std::vector<std::size_t>& widths) {
    if (widths.size() < 2 || widths.front() != spec.layout.n_input ||
        widths.back() != spec.layout.n_output)
        throw std::invalid_argument("baseline widths must start at n_input and end at n_output");
    ArchitectureGenome genome = ArchitectureGenome::layered(widths);
    ExperimentSpec adjusted = spec;
    adjusted.layout = genome.layout();
    return run_pipeline(adjusted, "baseline", &genome);
}

void RunRecord::save(const std::string& path) const {
    json j;
    j["arch"] = arch;
    j["genome"] = genome_path;
    j["models"] = model_paths;
    j["connection_count"] = connection_count;
    j["search_score"] = search_score;
    j["timings_sec"] = timings_sec;
    j["config"] = json::parse(config_snapshot);
    json evals_j = json::array();
    for (const auto& e : evals) {
        evals_j.push_back({{"trainer", e.trainer},
                           {"test_set", e.test_set},
                           {"auc", e.auc},
                           {"ap", e.ap},
                           {"ca", e.ca},
                           {"report", e.report_path}});
    }
    j["evals"] = evals_j;
    json log_j = json::array();
    for (const auto& s : stage_log)
        log_j.push_back({{"stage", s.stage}, {"dataset", s.dataset}, {"hash", hex64(s.dataset_hash)}});
    j["stage_log"] = log_j;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write run record: " + path);
    f << j.dump(2) << '\n';
}

RunRecord load_run_record(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read run record: " + path);
    const json j = json::parse(f);
    RunRecord rec;
    rec.arch = j.at("arch");
    rec.genome_path = j.at("genome");
    rec.model_paths = j.at("models").get<std::map<std::string, std::string>>();
    rec.connection_count = j.at("connection_count");
    rec.search_score = j.at("search_score");
    rec.timings_sec = j.at("timings_sec").get<std::map<std::string, double>>();
    rec.config_snapshot = j.at("config").dump(2);
    for (const auto& e : j.at("evals")) {
        rec.evals.push_back({e.at("trainer"), e.at("test_set"), e.at("auc"), e.at("ap"), e.at("ca"),
                             e.at("report")});
    }
    for (const auto& s : j.at("stage_log")) {
        rec.stage_log.push_back(
            {s.at("stage"), s.at("dataset"), std::stoull(s.at("hash").get<std::string>(), nullptr, 16)});
    }
    return rec;
}

std::string render_report_grid(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << "arch      trainer  test set     AUC      AP       CA\n";
    for (const auto& rec : records) {
        for (const auto& e : rec.evals) {
            char line[160];
            std::snprintf(line, sizeof(line), "%-9s %-8s %-12s %.4f   %.4f   %.4f\n",
                          rec.arch.c_str(), e.trainer.c_str(), e.test_set.c_str(), e.auc, e.ap, e.ca);
            os << line;
        }
    }
    return os.str();
}

void write_report_grid_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write report grid csv: " + path);
    f.precision(17);
    f << "arch,trainer,test_set,auc,ap,ca\n";
    for (const auto& rec : records)
        for (const auto& e : rec.evals)
            f << rec.arch << ',' << e.trainer << ',' << e.test_set << ',' << e.auc << ',' << e.ap
              << ',' << e.ca << '\n';
}

} // namespace nnn
