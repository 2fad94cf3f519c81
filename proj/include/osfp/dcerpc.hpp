#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "osfp/encoding.hpp"
#include "osfp/endpoint.hpp"
#include "osfp/mlp.hpp"

namespace osfp {

struct WindowsVersion {
    std::string name;  ///< "NT4", "2000", ...
    std::vector<std::string> editions;
    std::vector<std::string> service_packs;
    bool operator==(const WindowsVersion&) const = default;
};

/// Output layer of the endpoint-mapper network. Neurons are grouped per
/// version: the version neuron, its editions, then its service packs.
struct WindowsLabelSpace {
    std::vector<WindowsVersion> versions;

    /// NT4, 2000, 2003 and XP: 4 versions, 10 editions, 11 service packs.
    static WindowsLabelSpace standard();

    Eigen::Index total_outputs() const;
    Eigen::Index version_neuron(std::size_t version) const;
    Eigen::Index edition_neuron(std::size_t version, std::size_t edition) const;
    Eigen::Index sp_neuron(std::size_t version, std::size_t sp) const;
    bool operator==(const WindowsLabelSpace&) const = default;
};

struct WindowsLabel {
    std::string version;
    std::string edition;
    std::string service_pack;

    /// "2000 Server sp1"
    std::string describe() const;
    bool operator==(const WindowsLabel&) const = default;
};

/// +1 at the label's version, edition and service-pack neurons, -1 elsewhere.
Eigen::VectorXd windows_target(const WindowsLabelSpace& labels, const WindowsLabel& label);

struct WindowsVerdict {
    WindowsLabel label;
    Eigen::VectorXd scores;
    bool low_confidence = false;  ///< no known UUID, or weak version score
};

/// Version by argmax over version neurons; edition and service pack by
/// independent argmaxes within that version's groups.
WindowsVerdict decode_windows(const WindowsLabelSpace& labels, const Eigen::VectorXd& scores,
                              double decision_threshold = 0.5);

WindowsVerdict classify_windows(const Mlp& net, const EndpointSchema& schema, const WindowsLabelSpace& labels,
                                const EndpointMap& dump, double decision_threshold = 0.5);

/// Listing grouped under versions, ending with a "Setting OS to" line.
std::string format_windows_report(const WindowsLabelSpace& labels, const WindowsVerdict& verdict);

struct LabeledDump {
    EndpointMap dump;
    WindowsLabel label;
};

/// Endpoint map of a (version, edition, service pack) installation in the
/// synthetic Windows corpus. 2000 Professional sp0 is the three-program,
/// eight-binding dump of a freshly installed host.
EndpointMap windows_template(const WindowsLabel& label);

/// Every label combination of the space, `copies` samples each. The first
/// copy is the exact template; the others drop each binding with
/// probability `dropout`.
std::vector<LabeledDump> synthetic_windows_corpus(const WindowsLabelSpace& labels, std::size_t copies, double dropout,
                                                  std::uint64_t seed);

struct WindowsModule {
    EndpointSchema schema;
    WindowsLabelSpace labels;
    Mlp net;
    TrainHistory history;
    bool operator==(const WindowsModule&) const = default;
};

WindowsModule train_windows_module(const std::vector<LabeledDump>& corpus, const WindowsLabelSpace& labels,
                                   Eigen::Index hidden, const TrainConfig& cfg, std::uint64_t seed);

}  // namespace osfp
