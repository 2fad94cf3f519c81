#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "osfp/endpoint.hpp"
#include "osfp/signature.hpp"

namespace osfp {

inline constexpr std::size_t kTcpBlockSize = 75;
inline constexpr std::size_t kTSeqBlockSize = 27;
inline constexpr std::size_t kPuBlockSize = 16;
inline constexpr std::size_t kNmapInputSize = 7 * kTcpBlockSize + kTSeqBlockSize + kPuBlockSize;
static_assert(kNmapInputSize == 568);

inline constexpr const char* kNmapLayoutId = "nmap1-568";

/// Offsets inside a T1..T7 block.
namespace tcp_slot {
inline constexpr std::size_t kAck = 0;
inline constexpr std::size_t kAckS = 1;
inline constexpr std::size_t kAckSpp = 2;
inline constexpr std::size_t kAckO = 3;
inline constexpr std::size_t kDf = 4;
inline constexpr std::size_t kResp = 5;
inline constexpr std::size_t kFlags = 6;
inline constexpr std::size_t kFlagBits = 7;  // E U A P R S F
inline constexpr std::size_t kOptions = 14;  // 10 groups of 6
inline constexpr std::size_t kOptionGroups = 10;
inline constexpr std::size_t kOptionKinds = 6;  // EOL MAXSEG NOP TIMESTAMP WINDOW ECHOED
inline constexpr std::size_t kWindow = 74;
}  // namespace tcp_slot

/// Offsets inside the TSeq block.
namespace tseq_slot {
inline constexpr std::size_t kClass = 0;
inline constexpr std::size_t kClassValues = 1;  // TD C RI TR i800 64K
inline constexpr std::size_t kGcd = 7;
inline constexpr std::size_t kIpid = 8;
inline constexpr std::size_t kIpidValues = 9;  // I BI RPI RD C Z
inline constexpr std::size_t kSi = 15;
inline constexpr std::size_t kTs = 16;
inline constexpr std::size_t kTsValues = 17;  // 0 2HZ 100HZ 1000HZ U
inline constexpr std::size_t kVal = 22;
inline constexpr std::size_t kResp = 23;
}  // namespace tseq_slot

/// Offsets inside the PU block.
namespace pu_slot {
inline constexpr std::size_t kResp = 0;
inline constexpr std::size_t kDf = 1;
inline constexpr std::size_t kIpLen = 2;
inline constexpr std::size_t kRidE = 3;
inline constexpr std::size_t kRidF = 4;
inline constexpr std::size_t kULen = 5;
inline constexpr std::size_t kRipck0 = 6;
inline constexpr std::size_t kRipckE = 7;
inline constexpr std::size_t kRipckF = 8;
inline constexpr std::size_t kDatE = 9;
inline constexpr std::size_t kDatF = 10;
inline constexpr std::size_t kUckE = 11;
inline constexpr std::size_t kUckF = 12;
inline constexpr std::size_t kRipTl = 13;
inline constexpr std::size_t kTos = 14;
inline constexpr std::size_t kUck0 = 15;
}  // namespace pu_slot

struct LayoutEntry {
    std::size_t index = 0;
    TestId test = TestId::T1;
    std::string field;        ///< Nmap field name, or "-" for padding
    std::string sub_feature;  ///< which neuron of the field
};

/// Position table of the 568-input encoding.
class NmapLayout {
public:
    static const NmapLayout& canonical();

    std::size_t size() const { return entries_.size(); }
    const std::vector<LayoutEntry>& entries() const { return entries_; }
    const LayoutEntry& at(std::size_t index) const { return entries_.at(index); }
    std::size_t block_offset(TestId test) const;
    std::size_t block_size(TestId test) const;

    /// Tab-separated `index test field sub-feature` table.
    std::string to_table() const;

private:
    NmapLayout();
    std::vector<LayoutEntry> entries_;
};

class EncodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Encodes one observation. Present/absent categorical neurons are 1/-1,
/// numeric neurons carry the parsed value, missing data is 0.
Eigen::VectorXd encode_observation(const Observation& obs, const NmapLayout& layout = NmapLayout::canonical());

EndpointSchema build_endpoint_schema(const std::vector<EndpointMap>& corpus);
/// 1 at each present UUID or binding neuron, -1 elsewhere. Bindings unknown
/// to the schema only contribute their UUID neuron.
Eigen::VectorXd encode_endpoint_map(const EndpointMap& dump, const EndpointSchema& schema);

}  // namespace osfp
