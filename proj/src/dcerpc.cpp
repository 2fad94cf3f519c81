#include "osfp/dcerpc.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "osfp/random.hpp"

namespace osfp {

namespace {

std::size_t index_of(const std::vector<std::string>& list, const std::string& value, const char* what) {
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] == value) return i;
    throw std::invalid_argument(std::string("unknown Windows ") + what + " '" + value + "'");
}

std::size_t version_index(const WindowsLabelSpace& labels, const std::string& version) {
    for (std::size_t i = 0; i < labels.versions.size(); ++i)
        if (labels.versions[i].name == version) return i;
    throw std::invalid_argument("unknown Windows version '" + version + "'");
}

RpcProgram program(const char* uuid, std::optional<std::string> annotation, std::vector<Binding> bindings) {
    return {uuid, std::move(annotation), std::move(bindings)};
}

// Deterministic UUID for the synthetic programs of the corpus.
std::string synthetic_uuid(const std::string& name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) h = (h ^ c) * 0x100000001B3ULL;
    const auto a = splitmix64(h);
    const auto b = splitmix64(a);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%08llX-%04llX-%04llX-%04llX-%012llX",
                  static_cast<unsigned long long>(a >> 32), static_cast<unsigned long long>((a >> 16) & 0xFFFF),
                  static_cast<unsigned long long>(a & 0xFFFF), static_cast<unsigned long long>(b >> 48),
                  static_cast<unsigned long long>(b & 0xFFFFFFFFFFFFULL));
    return buf;
}

RpcProgram synthetic_program(const std::string& name) {
    std::string pipe = name;
    for (auto& c : pipe)
        if (c == ' ') c = '_';
    return {synthetic_uuid(name), name,
            {{"ncalrpc", pipe}, {"ncacn_np", "\\PIPE\\" + pipe}, {"ncacn_ip_tcp", std::nullopt}}};
}

std::vector<RpcProgram> version_base(const std::string& version) {
    const auto msgsvc = program("5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC", "Messenger Service",
                                {{"ncalrpc", "ntsvcs"},
                                 {"ncacn_np", "\\PIPE\\ntsvcs"},
                                 {"ncacn_np", "\\PIPE\\scerpc"},
                                 {"ncadg_ip_udp", std::nullopt}});
    const auto atsvc = program("1FF70682-0A51-30E8-076D-740BE8CEE98B", std::nullopt,
                               {{"ncalrpc", "LRPC"}, {"ncacn_ip_tcp", std::nullopt}});
    const auto sasec = program("378E52B0-C0A9-11CF-822D-00AA0051E40F", std::nullopt,
                               {{"ncalrpc", "LRPC"}, {"ncacn_ip_tcp", std::nullopt}});
    if (version == "2000") return {msgsvc, atsvc, sasec};
    if (version == "NT4")
        return {program("E1AF8308-5D1F-11C9-91A4-08002B14A0FA", std::nullopt,
                        {{"ncacn_ip_tcp", std::nullopt}, {"ncacn_np", "\\PIPE\\epmapper"}}),
                program("12345678-1234-ABCD-EF00-0123456789AB", "Spooler",
                        {{"ncacn_np", "\\PIPE\\spoolss"}, {"ncalrpc", "spoolss"}}),
                program("1FF70682-0A51-30E8-076D-740BE8CEE98B", std::nullopt, {{"ncacn_np", "\\PIPE\\atsvc"}})};
    if (version == "XP")
        return {msgsvc, atsvc,
                program("12B81E99-F207-4A4C-85D3-77B42F76FD14", "Secondary Logon", {{"ncalrpc", "SECLOGON"}}),
                program("3473DD4D-2E88-4006-9CBA-22570909DD10", "WinHttp Auto-Proxy Service",
                        {{"ncalrpc", "W32TIME_ALT"}, {"ncacn_np", "\\PIPE\\W32TIME_ALT"}})};
    if (version == "2003")
        return {atsvc, sasec,
                program("12B81E99-F207-4A4C-85D3-77B42F76FD14", "Secondary Logon", {{"ncalrpc", "SECLOGON"}}),
                program("3473DD4D-2E88-4006-9CBA-22570909DD10", "WinHttp Auto-Proxy Service",
                        {{"ncalrpc", "W32TIME_ALT"}}),
                program("50ABC2A4-574D-40B3-9D66-EE4FD5FBA076", "DNS Server",
                        {{"ncacn_ip_tcp", std::nullopt}, {"ncacn_np", "\\PIPE\\DNSSERVER"}})};
    return {synthetic_program("Windows " + version + " base")};
}

void add_programs(EndpointMap& map, const std::vector<RpcProgram>& programs) {
    for (const auto& p : programs) map.programs.push_back(p);
}

}  // namespace

WindowsLabelSpace WindowsLabelSpace::standard() {
    return {{{"NT4", {"Enterprise Server", "Server"}, {"6", "6a"}},
             {"2000", {"Server", "Professional", "Advanced Server"}, {"0", "1", "2", "3", "4"}},
             {"2003", {"Web Edition", "Enterprise Edition", "Standard Edition"}, {"0"}},
             {"XP", {"Professional", "Home"}, {"0", "1", "2"}}}};
}

Eigen::Index WindowsLabelSpace::total_outputs() const {
    Eigen::Index n = 0;
    for (const auto& v : versions) n += 1 + static_cast<Eigen::Index>(v.editions.size() + v.service_packs.size());
    return n;
}

Eigen::Index WindowsLabelSpace::version_neuron(std::size_t version) const {
    Eigen::Index n = 0;
    for (std::size_t i = 0; i < version; ++i)
        n += 1 + static_cast<Eigen::Index>(versions[i].editions.size() + versions[i].service_packs.size());
    return n;
}

Eigen::Index WindowsLabelSpace::edition_neuron(std::size_t version, std::size_t edition) const {
    return version_neuron(version) + 1 + static_cast<Eigen::Index>(edition);
}

Eigen::Index WindowsLabelSpace::sp_neuron(std::size_t version, std::size_t sp) const {
    return version_neuron(version) + 1 + static_cast<Eigen::Index>(versions[version].editions.size() + sp);
}

std::string WindowsLabel::describe() const { return version + " " + edition + " sp" + service_pack; }

Eigen::VectorXd windows_target(const WindowsLabelSpace& labels, const WindowsLabel& label) {
    Eigen::VectorXd t = Eigen::VectorXd::Constant(labels.total_outputs(), -1.0);
    const auto v = version_index(labels, label.version);
    const auto& ver = labels.versions[v];
    t[labels.version_neuron(v)] = 1.0;
    t[labels.edition_neuron(v, index_of(ver.editions, label.edition, "edition"))] = 1.0;
    t[labels.sp_neuron(v, index_of(ver.service_packs, label.service_pack, "service pack"))] = 1.0;
    return t;
}

WindowsVerdict decode_windows(const WindowsLabelSpace& labels, const Eigen::VectorXd& scores,
                              double decision_threshold) {
    if (scores.size() != labels.total_outputs()) throw std::invalid_argument("decode_windows: score length mismatch");
    WindowsVerdict verdict;
    verdict.scores = scores;
    std::size_t best = 0;
    for (std::size_t v = 1; v < labels.versions.size(); ++v)
        if (scores[labels.version_neuron(v)] > scores[labels.version_neuron(best)]) best = v;
    const auto& ver = labels.versions[best];
    auto argmax = [&](std::size_t count, auto neuron) {
        std::size_t at = 0;
        for (std::size_t i = 1; i < count; ++i)
            if (scores[neuron(i)] > scores[neuron(at)]) at = i;
        return at;
    };
    const auto e = argmax(ver.editions.size(), [&](std::size_t i) { return labels.edition_neuron(best, i); });
    const auto s = argmax(ver.service_packs.size(), [&](std::size_t i) { return labels.sp_neuron(best, i); });
    verdict.label = {ver.name, ver.editions[e], ver.service_packs[s]};
    verdict.low_confidence = scores[labels.version_neuron(best)] < decision_threshold;
    return verdict;
}

WindowsVerdict classify_windows(const Mlp& net, const EndpointSchema& schema, const WindowsLabelSpace& labels,
                                const EndpointMap& dump, double decision_threshold) {
    const Eigen::VectorXd input = encode_endpoint_map(dump, schema);
    auto verdict = decode_windows(labels, forward(net, input), decision_threshold);
    bool known = false;
    for (const auto& p : dump.programs) known = known || schema.uuid_neurons.contains(p.uuid);
    if (!known) verdict.low_confidence = true;
    return verdict;
}

std::string format_windows_report(const WindowsLabelSpace& labels, const WindowsVerdict& verdict) {
    std::ostringstream out;
    out.precision(12);
    out << "Neural Network Output (close to 1 is better):\n";
    for (std::size_t v = 0; v < labels.versions.size(); ++v) {
        const auto& ver = labels.versions[v];
        out << "Windows " << ver.name << ": " << verdict.scores[labels.version_neuron(v)] << '\n';
        out << "Editions:\n";
        for (std::size_t e = 0; e < ver.editions.size(); ++e)
            out << "    " << ver.editions[e] << ": " << verdict.scores[labels.edition_neuron(v, e)] << '\n';
        out << "Service Packs:\n";
        for (std::size_t s = 0; s < ver.service_packs.size(); ++s)
            out << "    " << ver.service_packs[s] << ": " << verdict.scores[labels.sp_neuron(v, s)] << '\n';
    }
    if (verdict.low_confidence) out << "Low confidence: no decisive endpoint evidence\n";
    out << "Setting OS to Windows " << verdict.label.describe() << '\n';
    return out.str();
}

EndpointMap windows_template(const WindowsLabel& label) {
    const auto space = WindowsLabelSpace::standard();
    const auto& ver = space.versions[version_index(space, label.version)];
    const auto edition = index_of(ver.editions, label.edition, "edition");
    const auto sp = index_of(ver.service_packs, label.service_pack, "service pack");

    EndpointMap map;
    add_programs(map, version_base(label.version));
    // 2000 Professional is the bare base installation.
    if (!(label.version == "2000" && label.edition == "Professional")) {
        const auto prefix = "Windows " + label.version + " " + ver.editions[edition];
        add_programs(map, {synthetic_program(prefix + " service A"), synthetic_program(prefix + " service B")});
    }
    // Service packs are cumulative; the first one adds nothing.
    for (std::size_t s = 1; s <= sp; ++s)
        add_programs(map, {synthetic_program("Windows " + label.version + " SP" + ver.service_packs[s] + " update")});
    return map;
}

std::vector<LabeledDump> synthetic_windows_corpus(const WindowsLabelSpace& labels, std::size_t copies, double dropout,
                                                  std::uint64_t seed) {
    std::vector<LabeledDump> corpus;
    Rng rng(seed);
    for (const auto& ver : labels.versions)
        for (const auto& edition : ver.editions)
            for (const auto& sp : ver.service_packs) {
                const WindowsLabel label{ver.name, edition, sp};
                const auto base = windows_template(label);
                corpus.push_back({base, label});
                for (std::size_t c = 1; c < copies; ++c) {
                    EndpointMap jittered;
                    for (const auto& p : base.programs) {
                        RpcProgram kept{p.uuid, p.annotation, {}};
                        for (const auto& b : p.bindings)
                            if (uniform_unit(rng) >= dropout) kept.bindings.push_back(b);
                        if (!kept.bindings.empty()) jittered.programs.push_back(std::move(kept));
                    }
                    corpus.push_back({std::move(jittered), label});
                }
            }
    return corpus;
}

WindowsModule train_windows_module(const std::vector<LabeledDump>& corpus, const WindowsLabelSpace& labels,
                                   Eigen::Index hidden, const TrainConfig& cfg, std::uint64_t seed) {
    if (corpus.empty()) throw std::invalid_argument("train_windows_module: empty corpus");
    WindowsModule module;
    module.labels = labels;
    std::vector<EndpointMap> dumps;
    for (const auto& d : corpus) dumps.push_back(d.dump);
    module.schema = build_endpoint_schema(dumps);

    Eigen::MatrixXd x(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(module.schema.total));
    Eigen::MatrixXd y(static_cast<Eigen::Index>(corpus.size()), labels.total_outputs());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = encode_endpoint_map(corpus[i].dump, module.schema).transpose();
        y.row(static_cast<Eigen::Index>(i)) = windows_target(labels, corpus[i].label).transpose();
    }
    module.net = init_weights({static_cast<Eigen::Index>(module.schema.total), hidden, labels.total_outputs()}, seed);
    module.history = train(module.net, x, y, cfg);
    return module;
}

}  // namespace osfp
