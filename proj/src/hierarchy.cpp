#include "osfp/hierarchy.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "osfp/encoding.hpp"

namespace osfp {

namespace {

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001B3ULL;
    return h;
}

void check_stage(const StageNet& s, const std::string& what) {
    if (s.pipeline.output_size() != s.net.input_size())
        throw std::invalid_argument(what + ": pipeline output does not match the network input");
    if (static_cast<std::size_t>(s.net.output_size()) != s.labels.size())
        throw std::invalid_argument(what + ": label count does not match the network output");
}

Eigen::Index argmax(const Eigen::VectorXd& v) {
    Eigen::Index at = 0;
    v.maxCoeff(&at);
    return at;
}

ScoreList label_scores(const std::vector<std::string>& labels, const Eigen::VectorXd& scores) {
    ScoreList out;
    for (std::size_t i = 0; i < labels.size(); ++i) out.emplace_back(labels[i], scores[static_cast<Eigen::Index>(i)]);
    return out;
}

std::string score_line(double score, const std::string& label) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "    %-22.17f %s\n", score, label.c_str());
    return buf;
}

}  // namespace

void HierarchyModel::check() const {
    check_stage(relevance, "relevance");
    check_stage(family, "family");
    if (relevance.net.output_size() != 1) throw std::invalid_argument("relevance: network must have one output");
    if (family.labels != family_labels) throw std::invalid_argument("family: labels differ from the model's families");
    for (const auto& [name, v] : versions) check_stage(v, "version:" + name);
}

const std::vector<StageTopology>& reference_topology() {
    static const std::vector<StageTopology> table = {{"relevance", 204, 96, 20, 1},
                                                     {"family", 145, 66, 20, 6},
                                                     {"version:Linux", 100, 41, 18, 8},
                                                     {"version:Solaris", 55, 26, 7, 5},
                                                     {"version:OpenBSD", 34, 23, 4, 3}};
    return table;
}

HierarchyConfig::HierarchyConfig() {
    for (const auto& row : reference_topology()) hidden[row.stage] = row.hidden;
}

const TrainConfig& HierarchyConfig::train_for(const Stage& stage) const {
    const auto it = stage_train.find(stage.name());
    return it == stage_train.end() ? train : it->second;
}

Eigen::Index HierarchyConfig::hidden_for(const Stage& stage) const {
    const auto it = hidden.find(stage.name());
    return it == hidden.end() ? default_hidden : it->second;
}

StageNet train_stage(const Dataset& data, const HierarchyConfig& cfg) {
    const auto name = data.stage.name();
    if (data.size() == 0) throw std::invalid_argument("stage " + name + ": empty dataset");
    if (data.size() < 2) throw std::invalid_argument("stage " + name + ": need at least 2 samples");
    StageNet s;
    s.stage = data.stage;
    s.labels = data.output_labels;
    s.pipeline = fit_reduction(data.inputs, cfg.reduction);
    if (s.pipeline.output_size() == 0) throw std::invalid_argument("stage " + name + ": every input column is constant");
    const Eigen::MatrixXd x = s.pipeline.apply_rows(data.inputs);

    const auto seed = derive_seed(cfg.seed, name_hash(name));
    s.net = init_weights({x.cols(), cfg.hidden_for(data.stage), static_cast<Eigen::Index>(s.labels.size())}, seed);
    auto tc = cfg.train_for(data.stage);
    tc.shuffle_seed = derive_seed(seed, tc.shuffle_seed);
    try {
        s.history = tc.subset_size ? train_subsets(s.net, x, data.targets, tc) : train(s.net, x, data.targets, tc);
    } catch (const TrainingError& e) {
        throw TrainingError(e.generation(), "stage " + name + ": training diverged");
    }
    return s;
}

HierarchyModel train_hierarchy(const Dataset& corpus, const HierarchyConfig& cfg) {
    HierarchyModel model;
    model.layout_id = corpus.layout_id;
    model.thresholds = cfg.thresholds;
    model.family_labels.assign(kFamilies.begin(), kFamilies.end());

    model.relevance = train_stage(restage(corpus, Stage::relevance()), cfg);
    model.family = train_stage(restage(corpus, Stage::family_stage()), cfg);
    for (const auto& f : kFamilies) {
        // Windows versions are read from the endpoint mapper instead.
        if (f == "Windows") continue;
        const auto slice = restage(corpus, Stage::version(f));
        if (slice.size() < 2) continue;
        model.versions[f] = train_stage(slice, cfg);
    }
    if (cfg.with_windows) {
        const auto labels = WindowsLabelSpace::standard();
        const auto seed = derive_seed(cfg.seed, name_hash("dcerpc"));
        const auto dumps = synthetic_windows_corpus(labels, cfg.windows_copies, cfg.windows_dropout, seed);
        auto tc = cfg.windows_train;
        tc.shuffle_seed = derive_seed(seed, tc.shuffle_seed);
        model.windows = train_windows_module(dumps, labels, cfg.windows_hidden, tc, seed);
    }
    model.check();
    return model;
}

HierarchyModel train_hierarchy(const std::vector<Signature>& db, const PrevalenceTable& prevalence, std::size_t total,
                               const HierarchyConfig& cfg) {
    const auto corpus = generate_dataset(db, prevalence, total, Stage::relevance(), cfg.seed);
    return train_hierarchy(corpus, cfg);
}

std::string Verdict::describe() const {
    switch (kind) {
        case VerdictKind::NotRelevant: return "not relevant";
        case VerdictKind::Unknown: return "unknown";
        case VerdictKind::Classified: break;
    }
    if (windows) return "Windows " + windows->describe();
    return version ? family + " " + *version : family;
}

ClassificationResult classify(const HierarchyModel& model, const Eigen::VectorXd& raw, const EndpointMap* dump) {
    if (raw.size() != model.relevance.pipeline.input_size())
        throw std::invalid_argument("classify: observation has " + std::to_string(raw.size()) +
                                    " features, model expects " +
                                    std::to_string(model.relevance.pipeline.input_size()));
    ClassificationResult r;
    r.stage_trace.push_back("relevance");
    r.relevance = model.relevance.scores(raw)[0];
    if (r.relevance < model.thresholds.relevance) {
        r.verdict.kind = VerdictKind::NotRelevant;
        return r;
    }

    r.stage_trace.push_back("family");
    const Eigen::VectorXd fam = model.family.scores(raw);
    r.family_scores = label_scores(model.family.labels, fam);
    const auto best = argmax(fam);
    if (fam[best] < model.thresholds.decision) {
        r.verdict.kind = VerdictKind::Unknown;
        r.verdict.note = "no family score reaches the decision threshold";
        return r;
    }
    r.verdict.kind = VerdictKind::Classified;
    r.verdict.family = model.family.labels[static_cast<std::size_t>(best)];

    if (r.verdict.family == "Windows") {
        if (!model.windows) {
            r.verdict.note = "model has no endpoint-mapper network; Windows version not analysed";
        } else if (!dump) {
            r.verdict.note = "no endpoint dump given; Windows version not analysed";
        } else {
            r.stage_trace.push_back("dcerpc");
            const auto& w = *model.windows;
            r.windows = classify_windows(w.net, w.schema, w.labels, *dump, model.thresholds.decision);
            r.verdict.windows = r.windows->label;
            r.verdict.version = r.windows->label.version;
            if (r.windows->low_confidence) r.verdict.note = "low confidence Windows verdict";
        }
        return r;
    }

    const auto it = model.versions.find(r.verdict.family);
    if (it == model.versions.end()) {
        r.verdict.note = "no version network for " + r.verdict.family;
        return r;
    }
    r.stage_trace.push_back("version:" + r.verdict.family);
    const Eigen::VectorXd ver = it->second.scores(raw);
    r.version_scores = label_scores(it->second.labels, ver);
    const auto vb = argmax(ver);
    if (ver[vb] < model.thresholds.decision)
        r.verdict.note = "no " + r.verdict.family + " version reaches the decision threshold";
    else
        r.verdict.version = it->second.labels[static_cast<std::size_t>(vb)];
    return r;
}

ClassificationResult classify(const HierarchyModel& model, const Observation& obs, const EndpointMap* dump) {
    return classify(model, encode_observation(obs), dump);
}

std::string format_report(const HierarchyModel& model, const ClassificationResult& result) {
    std::ostringstream out;
    out << "Relevant / not relevant analysis\n" << score_line(result.relevance, "relevant");
    if (!result.family_scores.empty()) {
        out << "\nOperating System analysis\n";
        for (const auto& [label, score] : result.family_scores) out << score_line(score, label);
    }
    if (result.version_scores) {
        out << '\n' << result.verdict.family << " version analysis\n";
        auto sorted = *result.version_scores;
        std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [label, score] : sorted) out << score_line(score, result.verdict.family + " " + label);
    }
    if (result.windows) {
        out << "\nWindows version analysis\n" << format_windows_report(model.windows->labels, *result.windows);
    } else if (result.verdict.kind == VerdictKind::Classified) {
        out << "\nSetting OS to " << result.verdict.describe() << '\n';
    } else {
        out << "\nVerdict: " << result.verdict.describe() << '\n';
    }
    if (!result.verdict.note.empty()) out << "Note: " << result.verdict.note << '\n';
    return out.str();
}

std::pair<double, double> Proportion::interval() const {
    if (total == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = static_cast<double>(total);
    const double p = value();
    const double denom = 1 + z * z / n;
    const double center = (p + z * z / (2 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

EvaluationReport evaluate(const HierarchyModel& model, const Dataset& heldout) {
    EvaluationReport rep;
    const auto nf = model.family_labels.size();
    rep.confusion.assign(nf, std::vector<std::size_t>(nf, 0));
    for (std::size_t i = 0; i < heldout.size(); ++i) {
        const Eigen::VectorXd raw = heldout.inputs.row(static_cast<Eigen::Index>(i)).transpose();
        const auto& truth = heldout.labels[i];

        const bool said_relevant = model.relevance.scores(raw)[0] >= model.thresholds.relevance;
        rep.relevance.total++;
        if (said_relevant == truth.relevant) rep.relevance.hits++;

        if (truth.relevant) {
            const auto fam = argmax(model.family.scores(raw));
            const auto actual = family_index(truth.family);
            rep.family.total++;
            if (actual) {
                rep.confusion[*actual][static_cast<std::size_t>(fam)]++;
                if (static_cast<std::size_t>(fam) == *actual) rep.family.hits++;
            }
            const auto it = model.versions.find(truth.family);
            if (it != model.versions.end()) {
                const auto& labels = it->second.labels;
                auto& p = rep.version[truth.family];
                p.total++;
                if (labels[static_cast<std::size_t>(argmax(it->second.scores(raw)))] == truth.version_group) p.hits++;
            }
        }

        const auto r = classify(model, raw);
        const auto& v = r.verdict;
        if (!truth.relevant) {
            (v.kind == VerdictKind::NotRelevant ? rep.perfect : rep.error)++;
        } else if (v.kind != VerdictKind::Classified) {
            rep.no_answer++;
        } else if (v.family != truth.family) {
            rep.error++;
        } else if (v.version && *v.version == truth.version_group) {
            rep.perfect++;
        } else {
            rep.partial++;
        }
    }
    return rep;
}

std::string format_evaluation(const HierarchyModel& model, const EvaluationReport& report) {
    std::ostringstream out;
    auto line = [&](const std::string& name, const Proportion& p) {
        const auto [lo, hi] = p.interval();
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-22s %5zu/%-5zu %.4f  95%% [%.4f, %.4f]\n", name.c_str(), p.hits, p.total,
                      p.value(), lo, hi);
        out << buf;
    };
    out << "Stage accuracy\n";
    line("relevance", report.relevance);
    line("family", report.family);
    for (const auto& [family, p] : report.version) line("version:" + family, p);

    out << "\nFamily confusion (rows actual, columns predicted)\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-10s", "");
    out << buf;
    for (const auto& f : model.family_labels) {
        std::snprintf(buf, sizeof buf, "%9s", f.substr(0, 8).c_str());
        out << buf;
    }
    out << '\n';
    for (std::size_t a = 0; a < report.confusion.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%-10s", model.family_labels[a].substr(0, 9).c_str());
        out << buf;
        for (auto c : report.confusion[a]) {
            std::snprintf(buf, sizeof buf, "%9zu", c);
            out << buf;
        }
        out << '\n';
    }

    out << "\nOutcome\n"
        << "perfect match  " << report.perfect << '\n'
        << "partial match  " << report.partial << '\n'
        << "error          " << report.error << '\n'
        << "no answer      " << report.no_answer << '\n';
    return out.str();
}

}  // namespace osfp
