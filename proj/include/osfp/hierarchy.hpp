#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "osfp/datagen.hpp"
#include "osfp/dcerpc.hpp"
#include "osfp/endpoint.hpp"
#include "osfp/mlp.hpp"
#include "osfp/preprocess.hpp"
#include "osfp/signature.hpp"

namespace osfp {

/// One trained stage: raw 568-wide input -> pipeline -> network.
struct StageNet {
    Stage stage;
    ReductionPipeline<double> pipeline;
    Mlp net;
    std::vector<std::string> labels;
    TrainHistory history;

    Eigen::VectorXd scores(const Eigen::VectorXd& raw) const { return forward(net, pipeline.apply(raw)); }
    bool operator==(const StageNet&) const = default;
};

struct Thresholds {
    double relevance = 0.0;
    double decision = 0.5;
    bool operator==(const Thresholds&) const = default;
};

struct HierarchyModel {
    StageNet relevance;
    StageNet family;
    std::map<std::string, StageNet> versions;  ///< keyed by family
    std::vector<std::string> family_labels;
    Thresholds thresholds;
    std::optional<WindowsModule> windows;
    std::string layout_id;

    /// Throws std::invalid_argument when a net and its pipeline or labels
    /// disagree in size.
    void check() const;
    bool operator==(const HierarchyModel&) const = default;
};

/// One row of the reference topology table: columns kept after correlation
/// reduction, then the network's input, hidden and output sizes.
struct StageTopology {
    std::string stage;
    Eigen::Index kept;
    Eigen::Index inputs;
    Eigen::Index hidden;
    Eigen::Index outputs;
};

/// relevance 204/96-20-1, family 145/66-20-6, Linux 100/41-18-8,
/// Solaris 55/26-7-5, OpenBSD 34/23-4-3.
const std::vector<StageTopology>& reference_topology();

struct HierarchyConfig {
    TrainConfig train;
    /// Per-stage overrides keyed by Stage::name().
    std::map<std::string, TrainConfig> stage_train;
    /// Hidden layer sizes keyed by Stage::name(); reference_topology() by default.
    std::map<std::string, Eigen::Index> hidden;
    Eigen::Index default_hidden = 6;
    ReductionOptions reduction;
    Thresholds thresholds;
    std::uint64_t seed = 1;

    /// Endpoint-mapper network trained on the synthetic Windows corpus.
    bool with_windows = true;
    std::size_t windows_copies = 20;
    double windows_dropout = 0.1;
    Eigen::Index windows_hidden = 42;
    TrainConfig windows_train;

    HierarchyConfig();
    const TrainConfig& train_for(const Stage& stage) const;
    Eigen::Index hidden_for(const Stage& stage) const;
};

/// Fits a pipeline on the stage's raw rows and trains its network.
StageNet train_stage(const Dataset& data, const HierarchyConfig& cfg);

/// `corpus` is a relevance-stage dataset over every signature; the family
/// and version datasets are carved out of it. Version nets are trained for
/// each family whose slice is non-empty.
HierarchyModel train_hierarchy(const Dataset& corpus, const HierarchyConfig& cfg);

/// Generates `total` samples from `db` and trains on all of them.
HierarchyModel train_hierarchy(const std::vector<Signature>& db, const PrevalenceTable& prevalence, std::size_t total,
                               const HierarchyConfig& cfg);

enum class VerdictKind { Classified, NotRelevant, Unknown };

struct Verdict {
    VerdictKind kind = VerdictKind::Unknown;
    std::string family;
    std::optional<std::string> version;  ///< version group, when decided
    std::optional<WindowsLabel> windows;
    std::string note;

    /// "Solaris 8", "Windows 2000 Server sp1", "not relevant", "unknown".
    std::string describe() const;
};

using ScoreList = std::vector<std::pair<std::string, double>>;

struct ClassificationResult {
    double relevance = 0;
    ScoreList family_scores;
    std::optional<ScoreList> version_scores;
    std::optional<WindowsVerdict> windows;
    Verdict verdict;
    std::vector<std::string> stage_trace;
};

ClassificationResult classify(const HierarchyModel& model, const Eigen::VectorXd& raw,
                              const EndpointMap* dump = nullptr);
ClassificationResult classify(const HierarchyModel& model, const Observation& obs, const EndpointMap* dump = nullptr);

/// Staged two-column listing: score, label.
std::string format_report(const HierarchyModel& model, const ClassificationResult& result);

struct Proportion {
    std::size_t hits = 0;
    std::size_t total = 0;

    double value() const { return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
    /// Wilson score interval at 95%.
    std::pair<double, double> interval() const;
};

struct EvaluationReport {
    Proportion relevance;
    Proportion family;                          ///< over relevant samples
    std::map<std::string, Proportion> version;  ///< per family, over samples of that family
    std::vector<std::vector<std::size_t>> confusion;  ///< actual family x predicted family
    std::size_t perfect = 0;
    std::size_t partial = 0;
    std::size_t error = 0;
    std::size_t no_answer = 0;
};

/// Family and version stages are scored on their own nets given the true
/// upstream label; the outcome categories follow the full cascade.
EvaluationReport evaluate(const HierarchyModel& model, const Dataset& heldout);
std::string format_evaluation(const HierarchyModel& model, const EvaluationReport& report);

}  // namespace osfp
