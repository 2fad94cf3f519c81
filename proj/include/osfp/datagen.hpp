#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "osfp/random.hpp"
#include "osfp/signature.hpp"

namespace osfp {

/// The families the classifier cares about, in output-neuron order.
inline const std::array<std::string, 6> kFamilies = {"Windows", "Linux", "Solaris", "OpenBSD", "FreeBSD", "NetBSD"};

std::optional<std::size_t> family_index(std::string_view family);
bool is_relevant(const Signature& sig);

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// OS prevalence weights keyed by family or signature name. A signature
/// name entry wins over its family entry; a family weight is split evenly
/// among that family's signatures without their own entry. `*` sets the
/// weight of everything else.
struct PrevalenceTable {
    std::map<std::string, double> weights;

    static PrevalenceTable uniform() { return PrevalenceTable{{{"*", 1.0}}}; }
    /// `<class-key> <weight>` lines; `#` comments. Keys may contain spaces,
    /// the weight is the last token.
    static PrevalenceTable parse(std::string_view text);

    /// Normalized per-signature weights.
    std::vector<double> resolve(const std::vector<Signature>& db) const;
};

enum class StageKind { Relevance, Family, Version };

struct Stage {
    StageKind kind = StageKind::Relevance;
    std::string family;  ///< for Version stages

    static Stage relevance() { return {StageKind::Relevance, {}}; }
    static Stage family_stage() { return {StageKind::Family, {}}; }
    static Stage version(std::string family) { return {StageKind::Version, std::move(family)}; }
    /// "relevance", "family" or "version:<Family>".
    static Stage parse(std::string_view text);
    std::string name() const;
    bool operator==(const Stage&) const = default;
};

struct SampleLabel {
    bool relevant = false;
    std::string family;
    std::string version_group;
    std::string source;  ///< signature name
    bool operator==(const SampleLabel&) const = default;
};

/// Labeled training corpus. Row i of `inputs` is the raw 568-wide encoding
/// of sample i; row i of `targets` its expected outputs for `stage`.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    std::vector<SampleLabel> labels;
    std::vector<std::string> output_labels;
    Stage stage;
    std::uint64_t seed = 0;
    std::string layout_id;

    std::size_t size() const { return labels.size(); }
    Dataset rows(std::span<const std::size_t> indices) const;
};

/// Output labels for a stage given the sample labels it sees.
std::vector<std::string> stage_output_labels(const Stage& stage, const std::vector<SampleLabel>& labels);
/// ±1 target vector of one sample.
Eigen::VectorXd stage_target(const Stage& stage, const std::vector<std::string>& output_labels,
                             const SampleLabel& label);
/// Whether a sample takes part in a stage.
bool stage_accepts(const Stage& stage, const SampleLabel& label);
/// Re-targets a dataset for another stage, keeping only the accepted rows.
Dataset restage(const Dataset& data, const Stage& stage);

SampleLabel label_of(const Signature& sig);

/// One synthetic host response satisfying every rule of `sig`.
Observation sample_observation(const Signature& sig, Rng& rng);

/// Largest-remainder apportionment of `total` by `weights`. Every positive
/// weight gets at least one item when total allows.
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total);

Dataset generate_dataset(const std::vector<Signature>& db, const PrevalenceTable& prevalence, std::size_t total,
                         const Stage& stage, std::uint64_t seed);

/// Random split; the first part holds round(fraction * n) rows.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction, std::uint64_t seed);

}  // namespace osfp
