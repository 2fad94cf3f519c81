#include "osfp/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "osfp/encoding.hpp"

namespace osfp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Closed interval admitted by a set of comparisons.
struct Interval {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    bool empty = false;
};

Interval admissible(std::span<const Comparison> terms) {
    std::uint64_t lo = 0;
    std::optional<std::uint64_t> hi;
    for (const auto& t : terms) {
        if (t.op == Comparison::Op::Less) {
            if (t.bound == 0) return {0, 0, true};
            hi = std::min(hi.value_or(t.bound - 1), t.bound - 1);
        } else {
            if (t.bound == std::uint64_t(-1)) return {0, 0, true};
            lo = std::max(lo, t.bound + 1);
        }
    }
    // An open upper end is closed at twice the lower bound.
    const std::uint64_t upper = hi.value_or(lo > (std::uint64_t(1) << 62) ? std::uint64_t(-1) : 2 * lo + 1);
    if (lo > upper) return {0, 0, true};
    return {lo, upper, false};
}

}  // namespace

std::optional<std::size_t> family_index(std::string_view family) {
    for (std::size_t i = 0; i < kFamilies.size(); ++i)
        if (kFamilies[i] == family) return i;
    return std::nullopt;
}

bool is_relevant(const Signature& sig) { return family_index(sig.primary_class().family).has_value(); }

PrevalenceTable PrevalenceTable::parse(std::string_view text) {
    PrevalenceTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto sep = t.find_last_of(" \t");
        if (sep == std::string_view::npos) throw ParseError(line_no, "expected '<class-key> <weight>'");
        const std::string key(trim(t.substr(0, sep)));
        const std::string weight(t.substr(sep + 1));
        double w = 0;
        try {
            std::size_t used = 0;
            w = std::stod(weight, &used);
            if (used != weight.size()) throw std::invalid_argument(weight);
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad weight '" + weight + "'");
        }
        if (!(w >= 0) || !std::isfinite(w)) throw ParseError(line_no, "weight must be non-negative");
        table.weights[key] = w;
    }
    return table;
}

std::vector<double> PrevalenceTable::resolve(const std::vector<Signature>& db) const {
    std::vector<double> out(db.size(), 0.0);
    std::map<std::string, std::size_t> family_members;
    for (const auto& sig : db)
        if (!weights.contains(sig.name)) ++family_members[sig.primary_class().family];

    const auto wildcard = weights.find("*");
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto& sig = db[i];
        if (auto it = weights.find(sig.name); it != weights.end()) {
            out[i] = it->second;
        } else if (auto f = weights.find(sig.primary_class().family); f != weights.end()) {
            out[i] = f->second / static_cast<double>(family_members[sig.primary_class().family]);
        } else if (wildcard != weights.end()) {
            out[i] = wildcard->second;
        }
    }
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (!(sum > 0)) throw GenerationError("prevalence table gives no signature a positive weight");
    for (auto& w : out) w /= sum;
    return out;
}

Stage Stage::parse(std::string_view text) {
    if (text == "relevance") return relevance();
    if (text == "family") return family_stage();
    if (text.starts_with("version:")) {
        const auto family = text.substr(8);
        if (!family_index(family)) throw std::invalid_argument("unknown family in stage '" + std::string(text) + "'");
        return version(std::string(family));
    }
    throw std::invalid_argument("unknown stage '" + std::string(text) + "'");
}

std::string Stage::name() const {
    switch (kind) {
        case StageKind::Relevance: return "relevance";
        case StageKind::Family: return "family";
        case StageKind::Version: return "version:" + family;
    }
    return "?";
}

SampleLabel label_of(const Signature& sig) {
    const auto& c = sig.primary_class();
    return {is_relevant(sig), c.family, c.line, sig.name};
}

bool stage_accepts(const Stage& stage, const SampleLabel& label) {
    switch (stage.kind) {
        case StageKind::Relevance: return true;
        case StageKind::Family: return label.relevant;
        case StageKind::Version: return label.relevant && label.family == stage.family;
    }
    return false;
}

std::vector<std::string> stage_output_labels(const Stage& stage, const std::vector<SampleLabel>& labels) {
    switch (stage.kind) {
        case StageKind::Relevance: return {"relevant"};
        case StageKind::Family: return {kFamilies.begin(), kFamilies.end()};
        case StageKind::Version: {
            std::set<std::string> groups;
            for (const auto& l : labels)
                if (stage_accepts(stage, l)) groups.insert(l.version_group);
            return {groups.begin(), groups.end()};
        }
    }
    return {};
}

Eigen::VectorXd stage_target(const Stage& stage, const std::vector<std::string>& output_labels,
                             const SampleLabel& label) {
    Eigen::VectorXd t = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(output_labels.size()), -1.0);
    if (stage.kind == StageKind::Relevance) {
        t[0] = label.relevant ? 1.0 : -1.0;
        return t;
    }
    const auto& key = stage.kind == StageKind::Family ? label.family : label.version_group;
    for (std::size_t i = 0; i < output_labels.size(); ++i)
        if (output_labels[i] == key) t[static_cast<Eigen::Index>(i)] = 1.0;
    return t;
}

Dataset Dataset::rows(std::span<const std::size_t> indices) const {
    Dataset out;
    out.inputs.resize(static_cast<Eigen::Index>(indices.size()), inputs.cols());
    out.targets.resize(static_cast<Eigen::Index>(indices.size()), targets.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(indices[r]);
        out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(src);
        out.targets.row(static_cast<Eigen::Index>(r)) = targets.row(src);
        out.labels.push_back(labels.at(indices[r]));
    }
    out.output_labels = output_labels;
    out.stage = stage;
    out.seed = seed;
    out.layout_id = layout_id;
    return out;
}

Dataset restage(const Dataset& data, const Stage& stage) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (stage_accepts(stage, data.labels[i])) keep.push_back(i);
    Dataset out = data.rows(keep);
    out.stage = stage;
    out.output_labels = stage_output_labels(stage, out.labels);
    out.targets.resize(static_cast<Eigen::Index>(out.size()), static_cast<Eigen::Index>(out.output_labels.size()));
    for (std::size_t i = 0; i < out.size(); ++i)
        out.targets.row(static_cast<Eigen::Index>(i)) = stage_target(stage, out.output_labels, out.labels[i]).transpose();
    return out;
}

Observation sample_observation(const Signature& sig, Rng& rng) {
    Observation obs;
    obs.source = sig.name;
    for (const auto& [test, rules] : sig.tests) {
        auto& fields = obs.tests[test];
        for (const auto& rule : rules) {
            if (rule.field == "Resp") {
                const auto* k = std::get_if<Const>(&rule.constraint);
                const auto* alts = std::get_if<OneOf>(&rule.constraint);
                std::string resp = k ? k->value : (alts ? alts->values[uniform_below(rng, alts->values.size())] : "Y");
                if (resp == "N") {
                    fields.clear();
                    fields["Resp"] = "N";
                    break;
                }
                fields["Resp"] = resp;
                continue;
            }
            std::visit(
                [&](const auto& c) {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, Const>) {
                        fields[rule.field] = c.value;
                    } else if constexpr (std::is_same_v<T, OneOf>) {
                        fields[rule.field] = c.values[uniform_below(rng, c.values.size())];
                    } else if constexpr (std::is_same_v<T, Comparison> || std::is_same_v<T, AllOf>) {
                        std::vector<Comparison> terms;
                        if constexpr (std::is_same_v<T, Comparison>)
                            terms.push_back(c);
                        else
                            terms = c.terms;
                        const auto range = admissible(terms);
                        if (range.empty)
                            throw GenerationError("unsatisfiable rule " + rule.field + " in " +
                                                  std::string(to_string(test)) + " of '" + sig.name + "'");
                        fields[rule.field] = format_hex(uniform_between(rng, range.lo, range.hi));
                    }
                    // Any: left out.
                },
                rule.constraint);
        }
    }
    return obs;
}

std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size(), 0);
    if (weights.empty() || !(sum > 0)) return counts;

    std::vector<double> remainder(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = static_cast<double>(total) * weights[i] / sum;
        counts[i] = static_cast<std::size_t>(std::floor(quota));
        remainder[i] = quota - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % order.size()]];

    // Coverage: move single items from the largest counts to starved entries.
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0 || counts[i] > 0) continue;
        const auto donor = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        if (counts[donor] <= 1) break;
        --counts[donor];
        ++counts[i];
    }
    return counts;
}

Dataset generate_dataset(const std::vector<Signature>& db, const PrevalenceTable& prevalence, std::size_t total,
                         const Stage& stage, std::uint64_t seed) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < db.size(); ++i)
        if (stage_accepts(stage, label_of(db[i]))) members.push_back(i);
    if (members.empty()) throw GenerationError("no signature belongs to stage " + stage.name());

    std::vector<Signature> slice;
    for (auto i : members) slice.push_back(db[i]);
    const auto weights = prevalence.resolve(slice);
    const auto positive = static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0; }));
    if (total < positive)
        throw GenerationError("total " + std::to_string(total) + " is smaller than the " + std::to_string(positive) +
                              " signatures with positive weight");
    const auto counts = apportion(weights, total);

    Dataset data;
    data.stage = stage;
    data.seed = seed;
    data.layout_id = kNmapLayoutId;
    for (std::size_t s = 0; s < slice.size(); ++s)
        for (std::size_t k = 0; k < counts[s]; ++k) data.labels.push_back(label_of(slice[s]));
    data.output_labels = stage_output_labels(stage, data.labels);

    data.inputs.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(kNmapInputSize));
    data.targets.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(data.output_labels.size()));
    Eigen::Index row = 0;
    for (std::size_t s = 0; s < slice.size(); ++s) {
        // One stream per signature, keyed by its database position.
        Rng rng(derive_seed(seed, members[s]));
        for (std::size_t k = 0; k < counts[s]; ++k, ++row) {
            data.inputs.row(row) = encode_observation(sample_observation(slice[s], rng)).transpose();
            data.targets.row(row) =
                stage_target(stage, data.output_labels, data.labels[static_cast<std::size_t>(row)]).transpose();
        }
    }
    return data;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle(std::span<std::size_t>(order), rng);
    const auto first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
    std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(first));
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {data.rows(a), data.rows(b)};
}

}  // namespace osfp
