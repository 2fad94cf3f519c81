#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "osfp/datagen.hpp"
#include "osfp/dcerpc.hpp"
#include "osfp/encoding.hpp"
#include "osfp/endpoint.hpp"
#include "osfp/hierarchy.hpp"
#include "osfp/persistence.hpp"
#include "osfp/preprocess.hpp"
#include "osfp/signature.hpp"
#include "osfp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace osfp;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kNotRelevant = 3,
    kUnknown = 4,
    kDiverged = 5,
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw InputError("cannot write " + path);
}

std::vector<Signature> load_db(const std::string& path) {
    std::vector<ParseWarning> warnings;
    auto db = parse_fingerprint_db(read_file(path), &warnings);
    for (const auto& w : warnings) std::cerr << path << ": line " << w.line << ": " << w.message << '\n';
    return db;
}

struct Config {
    HierarchyConfig hierarchy;
    std::string digest;
};

// Settings file: every key optional.
//   {"learning_rate": .., "momentum": .., "rate_increase": .., "rate_decrease": ..,
//    "min_rate": .., "max_rate": .., "generations": .., "subset_size": .., "target_error": ..,
//    "hidden": {"family": 20, ...}, "variance_target": .., "relevance_threshold": ..,
//    "decision_threshold": .., "windows": {"copies": .., "dropout": .., "hidden": .., "generations": ..}}
Config load_config(const std::string& path) {
    Config c;
    if (path.empty()) return c;
    const auto text = read_file(path);
    c.digest = fnv1a_hex(text);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    auto& h = c.hierarchy;
    auto& t = h.train;
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.momentum = j.value("momentum", t.momentum);
    t.rate_increase = j.value("rate_increase", t.rate_increase);
    t.rate_decrease = j.value("rate_decrease", t.rate_decrease);
    t.min_rate = j.value("min_rate", t.min_rate);
    t.max_rate = j.value("max_rate", t.max_rate);
    t.generations = j.value("generations", t.generations);
    if (j.contains("subset_size")) t.subset_size = j["subset_size"].get<std::size_t>();
    if (j.contains("target_error")) t.target_error = j["target_error"].get<double>();
    if (j.contains("hidden"))
        for (const auto& [stage, n] : j["hidden"].items()) h.hidden[stage] = n.get<Eigen::Index>();
    h.reduction.variance_target = j.value("variance_target", h.reduction.variance_target);
    h.thresholds.relevance = j.value("relevance_threshold", h.thresholds.relevance);
    h.thresholds.decision = j.value("decision_threshold", h.thresholds.decision);
    if (j.contains("windows")) {
        const auto& w = j["windows"];
        h.with_windows = w.value("enabled", true);
        h.windows_copies = w.value("copies", h.windows_copies);
        h.windows_dropout = w.value("dropout", h.windows_dropout);
        h.windows_hidden = w.value("hidden", h.windows_hidden);
        h.windows_train.generations = w.value("generations", h.windows_train.generations);
    }
    t.validate();
    return c;
}

void print_counts(const Dataset& d) {
    std::map<std::string, std::size_t> counts;
    for (const auto& l : d.labels) counts[l.relevant ? l.family : "(not relevant)"]++;
    for (const auto& [family, n] : counts) std::cout << family << '\t' << n << '\n';
    std::cout << "total\t" << d.size() << '\n';
}

std::string stage_csv_path(const std::string& base, const std::string& stage) {
    std::string s = stage;
    for (auto& ch : s)
        if (ch == ':' || ch == ' ' || ch == '/') ch = '_';
    const fs::path p(base);
    return (p.parent_path() / (p.stem().string() + "." + s + p.extension().string())).string();
}

void write_histories(const HierarchyModel& m, const std::string& base) {
    write_file(stage_csv_path(base, "relevance"), m.relevance.history.to_csv());
    write_file(stage_csv_path(base, "family"), m.family.history.to_csv());
    for (const auto& [family, s] : m.versions) write_file(stage_csv_path(base, "version:" + family), s.history.to_csv());
    if (m.windows) write_file(stage_csv_path(base, "dcerpc"), m.windows->history.to_csv());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Operating system fingerprinting with neural networks"};
    app.require_subcommand(1);

    std::string db_path, prevalence_path, out_path, data_path, config_path, model_path, obs_path, dump_path;
    std::string stage_name = "relevance", history_path, resume_path;
    std::size_t total = 15000, top = 10;
    std::uint64_t seed = 1;
    double variance = kDefaultVarianceTarget, fraction = 0.8;
    bool fixed_lr = false;

    auto* gen = app.add_subcommand("generate", "Monte Carlo dataset from a signature database");
    gen->add_option("--db", db_path, "Signature database")->required();
    gen->add_option("--prevalence", prevalence_path, "Prevalence table (default: uniform)");
    gen->add_option("--total", total, "Number of samples")->capture_default_str();
    gen->add_option("--seed", seed, "Random seed")->capture_default_str();
    gen->add_option("--stage", stage_name, "relevance, family or version:<Family>")->capture_default_str();
    gen->add_option("--out", out_path, "Dataset file")->required();

    auto* split = app.add_subcommand("split", "Random split of a dataset into two files");
    std::string out2_path;
    split->add_option("--data", data_path, "Dataset file")->required();
    split->add_option("--fraction", fraction, "Share of the first part")->capture_default_str();
    split->add_option("--seed", seed, "Random seed")->capture_default_str();
    split->add_option("--out", out_path, "First part")->required();
    split->add_option("--rest", out2_path, "Second part")->required();

    auto* reduce = app.add_subcommand("reduce", "Correlation reduction and PCA of a dataset");
    reduce->add_option("--data", data_path, "Dataset file")->required();
    reduce->add_option("--stage", stage_name, "Restrict to a stage's samples");
    reduce->add_option("--variance", variance, "Variance share kept by PCA")->capture_default_str();
    reduce->add_option("--out", out_path, "Pipeline file");

    auto* train = app.add_subcommand("train", "Train one stage or the full hierarchy");
    train->add_option("--data", data_path, "Dataset file")->required();
    train->add_option("--stage", stage_name, "relevance, family, version:<Family> or hierarchy")->capture_default_str();
    train->add_option("--config", config_path, "JSON settings");
    train->add_option("--seed", seed, "Random seed")->capture_default_str();
    train->add_flag("--fixed-lr", fixed_lr, "Keep the learning rate constant");
    train->add_option("--resume", resume_path, "Continue training a saved stage");
    train->add_option("--history", history_path, "History CSV (one per stage for a hierarchy)");
    train->add_option("--out", out_path, "Model file")->required();

    auto* cls = app.add_subcommand("classify", "Classify an observation with a hierarchy model");
    cls->add_option("--model", model_path, "Hierarchy model")->required();
    cls->add_option("--obs", obs_path, "Observation file")->required();
    cls->add_option("--dump", dump_path, "Endpoint-mapper dump for Windows hosts");

    auto* eval = app.add_subcommand("evaluate", "Accuracy of a hierarchy model on a dataset");
    eval->add_option("--model", model_path, "Hierarchy model")->required();
    eval->add_option("--data", data_path, "Dataset file")->required();

    auto* base = app.add_subcommand("baseline", "Best-fit ranking of signatures for an observation");
    base->add_option("--db", db_path, "Signature database")->required();
    base->add_option("--obs", obs_path, "Observation file")->required();
    base->add_option("--top", top, "Rows to print")->capture_default_str();

    auto* curves = app.add_subcommand("export-curves", "Write the training histories of a model as CSV");
    curves->add_option("--model", model_path, "Stage or hierarchy model")->required();
    curves->add_option("--out", out_path, "CSV path; hierarchies get one file per stage")->required();

    auto* layout = app.add_subcommand("layout", "Print the 568-entry input layout");
    layout->add_option("--out", out_path, "TSV file (default: stdout)");

    auto* synth = app.add_subcommand("synth-db", "Write the synthetic signature database");
    synth->add_option("--seed", seed, "Random seed")->default_val(SyntheticDbOptions{}.seed);
    synth->add_option("--out", out_path, "Database file (default: stdout)");

    auto* sample = app.add_subcommand("sample", "Print a synthetic observation of a named signature");
    std::string sig_name;
    sample->add_option("--db", db_path, "Signature database")->required();
    sample->add_option("--signature", sig_name, "Fingerprint name")->required();
    sample->add_option("--seed", seed, "Random seed")->capture_default_str();

    auto* tmpl = app.add_subcommand("windows-template", "Print the synthetic endpoint dump of a Windows installation");
    std::string win_version = "2000", win_edition = "Professional", win_sp = "0";
    tmpl->add_option("--version", win_version, "NT4, 2000, 2003 or XP")->capture_default_str();
    tmpl->add_option("--edition", win_edition, "Edition name")->capture_default_str();
    tmpl->add_option("--sp", win_sp, "Service pack")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            if (!fs::exists(db_path)) {
                std::cerr << "error: database not found: " << db_path << '\n';
                return kInputError;
            }
            const auto db = load_db(db_path);
            const auto prev =
                prevalence_path.empty() ? PrevalenceTable::uniform() : PrevalenceTable::parse(read_file(prevalence_path));
            const auto data = generate_dataset(db, prev, total, Stage::parse(stage_name), seed);
            save_dataset(data, out_path, {seed, {}});
            print_counts(data);
        } else if (*split) {
            const auto data = load_dataset(data_path);
            const auto [a, b] = split_dataset(data, fraction, seed);
            save_dataset(a, out_path, {seed, {}});
            save_dataset(b, out2_path, {seed, {}});
            std::cout << a.size() << " + " << b.size() << " samples\n";
        } else if (*reduce) {
            auto data = load_dataset(data_path);
            if (reduce->count("--stage")) data = restage(data, Stage::parse(stage_name));
            ReductionOptions opt;
            opt.variance_target = variance;
            const auto p = fit_reduction(data.inputs, opt);
            std::cout << reduction_report(p);
            if (!out_path.empty()) save_pipeline(p, out_path);
        } else if (*train) {
            auto cfg = load_config(config_path);
            cfg.hierarchy.seed = seed;
            if (fixed_lr) {
                cfg.hierarchy.train = cfg.hierarchy.train.fixed_rate();
                cfg.hierarchy.windows_train = cfg.hierarchy.windows_train.fixed_rate();
            }
            const ContainerMeta meta{seed, cfg.digest};
            const auto data = load_dataset(data_path);
            if (data.layout_id != kNmapLayoutId) throw InputError("dataset layout " + data.layout_id + " is not " + kNmapLayoutId);
            if (stage_name == "hierarchy") {
                if (!resume_path.empty()) throw InputError("--resume applies to single stages");
                const auto model = train_hierarchy(restage(data, Stage::relevance()), cfg.hierarchy);
                save_hierarchy(model, out_path, meta);
                if (!history_path.empty()) write_histories(model, history_path);
                std::cout << "relevance " << model.relevance.net.input_size() << "-" << cfg.hierarchy.hidden_for(Stage::relevance())
                          << "-1, family " << model.family.net.input_size() << "-"
                          << cfg.hierarchy.hidden_for(Stage::family_stage()) << "-6";
                for (const auto& [f, s] : model.versions)
                    std::cout << ", " << f << ' ' << s.net.input_size() << '-' << s.net.layer_sizes()[1] << '-'
                              << s.net.output_size();
                std::cout << '\n';
            } else {
                const auto stage = Stage::parse(stage_name);
                const auto slice = restage(data, stage);
                StageNet s;
                if (!resume_path.empty()) {
                    s = load_stage(resume_path);
                    if (!(s.stage == stage) || s.labels != slice.output_labels ||
                        s.pipeline.input_size() != slice.inputs.cols()) {
                        std::cerr << "error: " << resume_path << " does not match stage " << stage.name()
                                  << " of this dataset (stage, labels or layout differ)\n";
                        return kInputError;
                    }
                    auto tc = cfg.hierarchy.train_for(stage);
                    tc.shuffle_seed = derive_seed(seed, tc.shuffle_seed);
                    const Eigen::MatrixXd x = s.pipeline.apply_rows(slice.inputs);
                    const auto more = tc.subset_size ? train_subsets(s.net, x, slice.targets, tc)
                                                     : osfp::train(s.net, x, slice.targets, tc);
                    s.history.mse.insert(s.history.mse.end(), more.mse.begin(), more.mse.end());
                    s.history.lambda.insert(s.history.lambda.end(), more.lambda.begin(), more.lambda.end());
                } else {
                    s = train_stage(slice, cfg.hierarchy);
                }
                save_stage(s, out_path, meta);
                if (!history_path.empty()) write_file(history_path, s.history.to_csv());
                std::cout << stage.name() << ' ' << s.net.input_size() << '-' << s.net.layer_sizes()[1] << '-'
                          << s.net.output_size() << ", " << s.history.generations() << " generations, final mse "
                          << s.history.mse.back() << '\n';
            }
        } else if (*cls) {
            const auto model = load_hierarchy(model_path);
            const auto obs = parse_observation(read_file(obs_path));
            std::optional<EndpointMap> dump;
            if (!dump_path.empty()) dump = parse_endpoint_dump(read_file(dump_path));
            const auto raw = encode_observation(obs);
            if (model.layout_id != kNmapLayoutId || raw.size() != model.relevance.pipeline.input_size())
                throw InputError("observation layout does not match the model");
            const auto r = classify(model, raw, dump ? &*dump : nullptr);
            std::cout << format_report(model, r);
            if (r.verdict.kind == VerdictKind::NotRelevant) return kNotRelevant;
            if (r.verdict.kind == VerdictKind::Unknown) return kUnknown;
        } else if (*eval) {
            const auto model = load_hierarchy(model_path);
            const auto data = load_dataset(data_path);
            std::cout << format_evaluation(model, evaluate(model, restage(data, Stage::relevance())));
        } else if (*base) {
            if (!fs::exists(db_path)) {
                std::cerr << "error: database not found: " << db_path << '\n';
                return kInputError;
            }
            const auto db = load_db(db_path);
            const auto obs = parse_observation(read_file(obs_path));
            const auto ranked = best_fit(db, obs);
            std::cout << "rank\tscore\tfamily\tsignature\n";
            for (std::size_t i = 0; i < ranked.size() && i < top; ++i) {
                const auto& s = db[ranked[i].index];
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4f", ranked[i].score);
                std::cout << (i + 1) << '\t' << buf << '\t' << s.primary_class().family << '\t' << s.name << '\n';
            }
        } else if (*curves) {
            const auto kind = container_kind(model_path);
            if (kind == "hierarchy") {
                write_histories(load_hierarchy(model_path), out_path);
            } else if (kind == "stage") {
                write_file(out_path, load_stage(model_path).history.to_csv());
            } else {
                throw InputError(model_path + " holds a " + kind + ", not a trained model");
            }
        } else if (*layout) {
            const auto table = NmapLayout::canonical().to_table();
            if (out_path.empty())
                std::cout << table;
            else
                write_file(out_path, table);
        } else if (*synth) {
            SyntheticDbOptions opt;
            opt.seed = seed;
            const auto text = synthetic_fingerprint_text(opt);
            if (out_path.empty())
                std::cout << text;
            else
                write_file(out_path, text);
        } else if (*sample) {
            const auto db = load_db(db_path);
            const auto it = std::find_if(db.begin(), db.end(), [&](const Signature& s) { return s.name == sig_name; });
            if (it == db.end()) throw InputError("no signature named '" + sig_name + "'");
            Rng rng(seed);
            std::cout << serialize_observation(sample_observation(*it, rng));
        } else if (*tmpl) {
            std::cout << serialize_endpoint_dump(windows_template({win_version, win_edition, win_sp}));
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const PersistenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const TrainingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}
