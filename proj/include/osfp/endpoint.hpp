#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace osfp {

struct Binding {
    std::string protocol;
    std::optional<std::string> endpoint;
    bool operator==(const Binding&) const = default;
};

struct RpcProgram {
    std::string uuid;  ///< upper-case 8-4-4-4-12 form
    std::optional<std::string> annotation;
    std::vector<Binding> bindings;
    bool operator==(const RpcProgram&) const = default;
};

/// Endpoint-mapper dump of one host.
struct EndpointMap {
    std::vector<RpcProgram> programs;

    std::size_t binding_count() const;
    bool operator==(const EndpointMap&) const = default;
};

bool is_uuid(std::string_view text);

/// Parses a dump. Accepts the line format
///
///     uuid 5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC
///     annotation Messenger Service
///       binding ncalrpc ntsvcs
///       binding ncadg_ip_udp
///
/// and the key="value" listing printed by endpoint-mapper tools
/// (uuid="...", annotation="...", protocol="..." endpoint="..." id="...").
EndpointMap parse_endpoint_dump(std::string_view text);
std::string serialize_endpoint_dump(const EndpointMap& map);

/// Input neuron allocation for the endpoint-mapper network: one neuron per
/// UUID and one per (UUID, protocol, endpoint) binding, in first-seen order.
struct EndpointSchema {
    using BindingKey = std::tuple<std::string, std::string, std::string>;

    std::map<std::string, std::size_t> uuid_neurons;
    std::map<BindingKey, std::size_t> binding_neurons;
    std::size_t total = 0;

    static BindingKey key(const std::string& uuid, const Binding& b) {
        return {uuid, b.protocol, b.endpoint.value_or("")};
    }
    bool operator==(const EndpointSchema&) const = default;
};

}  // namespace osfp
