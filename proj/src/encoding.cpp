#include "osfp/encoding.hpp"

#include <array>
#include <sstream>
#include <string_view>

namespace osfp {

namespace {

constexpr std::array<std::string_view, 3> kAckValues = {"S", "S++", "O"};
constexpr std::array<char, 7> kFlagLetters = {'E', 'U', 'A', 'P', 'R', 'S', 'F'};
constexpr std::array<std::string_view, 6> kOptionNames = {"EOL", "MAXSEG", "NOP", "TIMESTAMP", "WINDOW", "ECHOED"};
constexpr std::array<std::string_view, 6> kClassNames = {"TD", "C", "RI", "TR", "i800", "64K"};
constexpr std::array<std::string_view, 6> kIpidNames = {"I", "BI", "RPI", "RD", "C", "Z"};
constexpr std::array<std::string_view, 5> kTsNames = {"0", "2HZ", "100HZ", "1000HZ", "U"};

std::size_t flag_index(char c) {
    if (c == 'B') c = 'E';  // older files write the ECN-echo bit as B
    for (std::size_t i = 0; i < kFlagLetters.size(); ++i)
        if (kFlagLetters[i] == c) return i;
    return kFlagLetters.size();
}

std::size_t option_index(char c) {
    switch (c) {
        case 'L': return 0;
        case 'M': return 1;
        case 'N': return 2;
        case 'T': return 3;
        case 'W': return 4;
        case 'E': return 5;
        default: return kOptionNames.size();
    }
}

using Fields = std::map<std::string, std::string>;

const std::string* find(const Fields& f, const char* name) {
    const auto it = f.find(name);
    return it == f.end() ? nullptr : &it->second;
}

double yes_no(const std::string& v) { return v == "Y" ? 1.0 : (v == "N" ? -1.0 : 0.0); }

template <std::size_t N>
void one_hot(Eigen::Ref<Eigen::VectorXd> out, std::size_t at, const std::array<std::string_view, N>& values,
             const std::string& v) {
    for (std::size_t i = 0; i < N; ++i) out[at + i] = values[i] == v ? 1.0 : -1.0;
}

double numeric(const std::string& v, TestId test, const char* field) {
    const auto n = parse_hex(v);
    if (!n)
        throw EncodeError("non-hex value '" + v + "' for field " + field + " in " + std::string(to_string(test)));
    return static_cast<double>(*n);
}

// Resp=N leaves the rest of a block at 0. Returns false in that case.
bool encode_resp(const Fields& f, double& slot) {
    const auto* resp = find(f, "Resp");
    if (resp && *resp == "N") {
        slot = -1.0;
        return false;
    }
    slot = 1.0;
    return true;
}

void encode_tcp(TestId test, const Fields& f, Eigen::Ref<Eigen::VectorXd> b) {
    using namespace tcp_slot;
    if (!encode_resp(f, b[kResp])) return;
    if (const auto* ack = find(f, "ACK")) {
        b[kAck] = 1.0;
        one_hot(b, kAckS, kAckValues, *ack);
    }
    if (const auto* df = find(f, "DF")) b[kDf] = yes_no(*df);
    if (const auto* flags = find(f, "Flags")) {
        for (std::size_t i = 0; i < kFlagLetters.size(); ++i) b[kFlagBits + i] = -1.0;
        for (char c : *flags) {
            const auto i = flag_index(c);
            if (i == kFlagLetters.size())
                throw EncodeError("unknown flag '" + std::string(1, c) + "' in Flags of " + std::string(to_string(test)));
            b[kFlagBits + i] = 1.0;
        }
        b[kFlags] = flags->empty() ? -1.0 : 1.0;
    }
    if (const auto* ops = find(f, "Ops")) {
        b.segment(kOptions, kOptionGroups * kOptionKinds).setConstant(-1.0);
        for (std::size_t g = 0; g < ops->size() && g < kOptionGroups; ++g) {
            const auto k = option_index((*ops)[g]);
            if (k == kOptionNames.size())
                throw EncodeError("unknown option '" + std::string(1, (*ops)[g]) + "' in Ops of " +
                                  std::string(to_string(test)));
            b[kOptions + g * kOptionKinds + k] = 1.0;
        }
    }
    if (const auto* w = find(f, "W")) b[kWindow] = numeric(*w, test, "W");
}

void encode_tseq(const Fields& f, Eigen::Ref<Eigen::VectorXd> b) {
    using namespace tseq_slot;
    if (!encode_resp(f, b[kResp])) return;
    if (const auto* v = find(f, "Class")) {
        b[kClass] = 1.0;
        one_hot(b, kClassValues, kClassNames, *v);
    }
    if (const auto* v = find(f, "gcd")) b[kGcd] = numeric(*v, TestId::TSeq, "gcd");
    if (const auto* v = find(f, "IPID")) {
        b[kIpid] = 1.0;
        one_hot(b, kIpidValues, kIpidNames, *v);
    }
    if (const auto* v = find(f, "SI")) b[kSi] = numeric(*v, TestId::TSeq, "SI");
    if (const auto* v = find(f, "TS")) {
        b[kTs] = 1.0;
        one_hot(b, kTsValues, kTsNames, *v);
    }
    if (const auto* v = find(f, "VAL")) b[kVal] = numeric(*v, TestId::TSeq, "VAL");
}

void encode_pu(const Fields& f, Eigen::Ref<Eigen::VectorXd> b) {
    using namespace pu_slot;
    if (!encode_resp(f, b[kResp])) return;
    auto pm = [](const std::string& v, const char* want) { return v == want ? 1.0 : -1.0; };
    if (const auto* v = find(f, "DF")) b[kDf] = yes_no(*v);
    if (const auto* v = find(f, "IPLEN")) b[kIpLen] = numeric(*v, TestId::PU, "IPLEN");
    if (const auto* v = find(f, "RID")) {
        b[kRidE] = pm(*v, "E");
        b[kRidF] = pm(*v, "F");
    }
    if (const auto* v = find(f, "ULEN")) b[kULen] = numeric(*v, TestId::PU, "ULEN");
    if (const auto* v = find(f, "RIPCK")) {
        b[kRipck0] = pm(*v, "0");
        b[kRipckE] = pm(*v, "E");
        b[kRipckF] = pm(*v, "F");
    }
    if (const auto* v = find(f, "DAT")) {
        b[kDatE] = pm(*v, "E");
        b[kDatF] = pm(*v, "F");
    }
    if (const auto* v = find(f, "UCK")) {
        b[kUckE] = pm(*v, "E");
        b[kUckF] = pm(*v, "F");
        b[kUck0] = pm(*v, "0");
    }
    if (const auto* v = find(f, "RIPTL")) b[kRipTl] = numeric(*v, TestId::PU, "RIPTL");
    if (const auto* v = find(f, "TOS")) b[kTos] = numeric(*v, TestId::PU, "TOS");
}

}  // namespace

NmapLayout::NmapLayout() {
    entries_.resize(kNmapInputSize);
    auto put = [&](TestId t, std::size_t offset, std::string field, std::string sub) {
        const auto i = block_offset(t) + offset;
        entries_[i] = {i, t, std::move(field), std::move(sub)};
    };
    for (auto t : kAllTests) {
        for (std::size_t i = 0; i < block_size(t); ++i) put(t, i, "-", "padding");
    }
    for (std::size_t ti = 0; ti < 7; ++ti) {
        const auto t = kAllTests[ti];
        using namespace tcp_slot;
        put(t, kAck, "ACK", "present");
        for (std::size_t i = 0; i < kAckValues.size(); ++i) put(t, kAckS + i, "ACK", std::string(kAckValues[i]));
        put(t, kDf, "DF", "Y");
        put(t, kResp, "Resp", "Y");
        put(t, kFlags, "Flags", "any");
        for (std::size_t i = 0; i < kFlagLetters.size(); ++i) put(t, kFlagBits + i, "Flags", std::string(1, kFlagLetters[i]));
        for (std::size_t g = 0; g < kOptionGroups; ++g)
            for (std::size_t k = 0; k < kOptionKinds; ++k)
                put(t, kOptions + g * kOptionKinds + k, "Ops",
                    "opt" + std::to_string(g + 1) + ":" + std::string(kOptionNames[k]));
        put(t, kWindow, "W", "value");
    }
    {
        using namespace tseq_slot;
        const auto t = TestId::TSeq;
        put(t, kClass, "Class", "present");
        for (std::size_t i = 0; i < kClassNames.size(); ++i) put(t, kClassValues + i, "Class", std::string(kClassNames[i]));
        put(t, kGcd, "gcd", "value");
        put(t, kIpid, "IPID", "present");
        for (std::size_t i = 0; i < kIpidNames.size(); ++i) put(t, kIpidValues + i, "IPID", std::string(kIpidNames[i]));
        put(t, kSi, "SI", "value");
        put(t, kTs, "TS", "present");
        for (std::size_t i = 0; i < kTsNames.size(); ++i) put(t, kTsValues + i, "TS", std::string(kTsNames[i]));
        put(t, kVal, "VAL", "value");
        put(t, kResp, "Resp", "Y");
    }
    {
        using namespace pu_slot;
        const auto t = TestId::PU;
        put(t, kResp, "Resp", "Y");
        put(t, kDf, "DF", "Y");
        put(t, kIpLen, "IPLEN", "value");
        put(t, kRidE, "RID", "E");
        put(t, kRidF, "RID", "F");
        put(t, kULen, "ULEN", "value");
        put(t, kRipck0, "RIPCK", "0");
        put(t, kRipckE, "RIPCK", "E");
        put(t, kRipckF, "RIPCK", "F");
        put(t, kDatE, "DAT", "E");
        put(t, kDatF, "DAT", "F");
        put(t, kUckE, "UCK", "E");
        put(t, kUckF, "UCK", "F");
        put(t, kRipTl, "RIPTL", "value");
        put(t, kTos, "TOS", "value");
        put(t, kUck0, "UCK", "0");
    }
}

const NmapLayout& NmapLayout::canonical() {
    static const NmapLayout layout;
    return layout;
}

std::size_t NmapLayout::block_offset(TestId test) const {
    switch (test) {
        case TestId::PU: return 7 * kTcpBlockSize + kTSeqBlockSize;
        case TestId::TSeq: return 7 * kTcpBlockSize;
        default: return static_cast<std::size_t>(test) * kTcpBlockSize;
    }
}

std::size_t NmapLayout::block_size(TestId test) const {
    switch (test) {
        case TestId::PU: return kPuBlockSize;
        case TestId::TSeq: return kTSeqBlockSize;
        default: return kTcpBlockSize;
    }
}

std::string NmapLayout::to_table() const {
    std::ostringstream out;
    out << "index\ttest\tfield\tsub_feature\n";
    for (const auto& e : entries_)
        out << e.index << '\t' << to_string(e.test) << '\t' << e.field << '\t' << e.sub_feature << '\n';
    return out.str();
}

Eigen::VectorXd encode_observation(const Observation& obs, const NmapLayout& layout) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
    for (const auto& [test, fields] : obs.tests) {
        auto block = v.segment(static_cast<Eigen::Index>(layout.block_offset(test)),
                               static_cast<Eigen::Index>(layout.block_size(test)));
        switch (test) {
            case TestId::TSeq: encode_tseq(fields, block); break;
            case TestId::PU: encode_pu(fields, block); break;
            default: encode_tcp(test, fields, block); break;
        }
    }
    return v;
}

EndpointSchema build_endpoint_schema(const std::vector<EndpointMap>& corpus) {
    if (corpus.empty()) throw std::invalid_argument("build_endpoint_schema: empty corpus");
    EndpointSchema schema;
    for (const auto& dump : corpus) {
        for (const auto& program : dump.programs) {
            if (schema.uuid_neurons.emplace(program.uuid, schema.total).second) ++schema.total;
            for (const auto& b : program.bindings)
                if (schema.binding_neurons.emplace(EndpointSchema::key(program.uuid, b), schema.total).second)
                    ++schema.total;
        }
    }
    return schema;
}

Eigen::VectorXd encode_endpoint_map(const EndpointMap& dump, const EndpointSchema& schema) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(schema.total), -1.0);
    for (const auto& program : dump.programs) {
        if (auto u = schema.uuid_neurons.find(program.uuid); u != schema.uuid_neurons.end())
            v[static_cast<Eigen::Index>(u->second)] = 1.0;
        for (const auto& b : program.bindings)
            if (auto n = schema.binding_neurons.find(EndpointSchema::key(program.uuid, b));
                n != schema.binding_neurons.end())
                v[static_cast<Eigen::Index>(n->second)] = 1.0;
    }
    return v;
}

}  // namespace osfp
