#include "osfp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "osfp/random.hpp"

namespace osfp {

namespace {

using Fields = std::map<std::string, std::string>;
using Profile = std::map<TestId, Fields>;

// "@" in a W field stands for the signature's window size.
constexpr const char* kWindowSlot = "@";

struct Domain {
    TestId test;
    std::string field;
    std::vector<std::string> values;
};

const std::vector<Domain>& domains() {
    static const std::vector<Domain> table = [] {
        std::vector<Domain> d;
        const std::vector<std::string> syn_ops = {"MNWNNT", "MNNTNW", "M", "MWNNNT", "MNW", "MNNT", "MWNNT", "MNWNNTNNM",
                                                  "MNWNNTLE"};
        for (auto t : {TestId::T1, TestId::T2, TestId::T3, TestId::T4, TestId::T5, TestId::T6, TestId::T7}) {
            const bool syn = t == TestId::T1 || t == TestId::T3;
            if (t != TestId::T1 && t != TestId::T5) d.push_back({t, "Resp", {"Y", "N"}});
            d.push_back({t, "DF", {"Y", "N"}});
            if (syn)
                d.push_back({t, "W", {kWindowSlot}});
            else if (t == TestId::T5)
                d.push_back({t, "W", {"0"}});
            else
                d.push_back({t, "W", {"0", kWindowSlot}});
            if (syn)
                d.push_back({t, "ACK", {"S++", "S"}});
            else if (t == TestId::T5 || t == TestId::T7)
                d.push_back({t, "ACK", {"S++", "S", "O"}});
            else
                d.push_back({t, "ACK", {"O", "S", "S++"}});
            switch (t) {
                case TestId::T1: d.push_back({t, "Flags", {"AS"}}); break;
                case TestId::T3: d.push_back({t, "Flags", {"AS", "A", "AR", "ASF"}}); break;
                case TestId::T2:
                case TestId::T5: d.push_back({t, "Flags", {"AR", "R", "A"}}); break;
                case TestId::T7: d.push_back({t, "Flags", {"AR", "ARP", "AFPR", "R"}}); break;
                default: d.push_back({t, "Flags", {"R", "AR"}}); break;
            }
            if (syn)
                d.push_back({t, "Ops", syn_ops});
            else if (t == TestId::T5)
                d.push_back({t, "Ops", {""}});
            else
                d.push_back({t, "Ops", {"", "M", "WNMETL"}});
        }
        d.push_back({TestId::TSeq, "Class", {"TD", "C", "RI", "TR", "i800", "64K"}});
        d.push_back({TestId::TSeq, "IPID", {"I", "BI", "RPI", "RD", "C", "Z"}});
        d.push_back({TestId::TSeq, "TS", {"0", "2HZ", "100HZ", "1000HZ", "U"}});
        d.push_back({TestId::PU, "Resp", {"Y", "N"}});
        d.push_back({TestId::PU, "DF", {"Y", "N"}});
        d.push_back({TestId::PU, "TOS", {"0", "C0", "10"}});
        d.push_back({TestId::PU, "IPLEN", {"38", "164", "70", "B0"}});
        d.push_back({TestId::PU, "RIPTL", {"148", "15C", "134"}});
        d.push_back({TestId::PU, "RID", {"E", "F"}});
        d.push_back({TestId::PU, "RIPCK", {"E", "F", "0"}});
        d.push_back({TestId::PU, "UCK", {"E", "F", "0"}});
        d.push_back({TestId::PU, "ULEN", {"134"}});
        d.push_back({TestId::PU, "DAT", {"E", "F"}});
        return d;
    }();
    return table;
}

const std::vector<std::string> kGcdChoices = {"1", "<6", "2", "3"};
const std::vector<std::string> kSiChoices = {"<5",          "<1F4",          "<2D3CFA0&>73C6B", "<1E&>2",
                                             "<C8&>32",     ">1F4&<1388",    "<3E8",            ">7A120&<4C4B40"};

struct GroupSpec {
    std::string line;
    std::size_t count;
    std::vector<std::string> names;  ///< used in order; generated names after that
};

struct FamilySpec {
    std::string vendor;
    std::string family;
    std::string purpose;
    std::string name_prefix;
    std::vector<GroupSpec> groups;
    std::string fixed;  ///< test lines overriding the random base
    std::set<TestId> frozen;
    std::size_t discriminating = 14;
    std::size_t group_mutations = 5;
    std::size_t extra_mutations = 3;  ///< per signature, at most
    double alternatives = 0.25;       ///< chance of a two-valued TSeq field
    std::vector<std::string> references;  ///< complete signatures appended verbatim
};

FamilySpec family_spec(std::string vendor, std::string family, std::string purpose, std::string prefix,
                       std::vector<GroupSpec> groups = {}) {
    FamilySpec s;
    s.vendor = std::move(vendor);
    s.family = std::move(family);
    s.purpose = std::move(purpose);
    s.name_prefix = std::move(prefix);
    s.groups = std::move(groups);
    return s;
}

Profile parse_profile(const std::string& text) {
    Profile p;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto open = line.find('(');
        const auto test = parse_test_id(line.substr(0, open));
        auto& fields = p[*test];
        std::istringstream body(line.substr(open + 1, line.size() - open - 2));
        std::string kv;
        while (std::getline(body, kv, '%')) {
            const auto eq = kv.find('=');
            fields[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
    }
    return p;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    return v[uniform_below(rng, v.size())];
}

Profile random_base(Rng& rng) {
    Profile p;
    for (const auto& d : domains()) p[d.test][d.field] = pick(d.values, rng);
    return p;
}

void overlay(Profile& p, const Profile& over) {
    for (const auto& [test, fields] : over)
        for (const auto& [k, v] : fields) p[test][k] = v;
}

std::vector<const Domain*> mutable_domains(const FamilySpec& spec) {
    std::vector<const Domain*> out;
    for (const auto& d : domains())
        if (d.values.size() > 1 && !spec.frozen.contains(d.test)) out.push_back(&d);
    return out;
}

void mutate(Profile& p, const Domain& d, Rng& rng) {
    auto& value = p[d.test][d.field];
    std::vector<std::string> others;
    for (const auto& v : d.values)
        if (v != value) others.push_back(v);
    value = pick(others, rng);
}

std::size_t profile_distance(const Profile& a, const Profile& b) {
    std::size_t n = 0;
    for (const auto& [test, fields] : a)
        for (const auto& [k, v] : fields)
            if (b.at(test).at(k) != v) ++n;
    return n;
}

std::string format_test(TestId t, const Fields& f, const std::string& w) {
    static const std::vector<std::string> tcp_order = {"DF", "W", "ACK", "Flags", "Ops"};
    static const std::vector<std::string> tseq_order = {"Class", "gcd", "SI", "IPID", "TS"};
    static const std::vector<std::string> pu_order = {"DF",  "TOS", "IPLEN", "RIPTL", "RID",
                                                      "RIPCK", "UCK", "ULEN", "DAT"};
    std::ostringstream out;
    out << to_string(t) << '(';
    const auto resp = f.find("Resp");
    if (resp != f.end() && resp->second == "N") {
        out << "Resp=N)";
        return out.str();
    }
    bool first = true;
    auto emit = [&](const std::string& k, const std::string& v) {
        out << (first ? "" : "%") << k << '=' << v;
        first = false;
    };
    if (t == TestId::T2 || t == TestId::T3) emit("Resp", "Y");
    const auto& order = t == TestId::TSeq ? tseq_order : t == TestId::PU ? pu_order : tcp_order;
    for (const auto& k : order) {
        const auto it = f.find(k);
        if (it == f.end()) continue;
        emit(k, it->second == kWindowSlot ? w : it->second);
    }
    out << ')';
    return out.str();
}

std::string format_signature(const std::string& name, const FamilySpec& spec, const std::string& line,
                             const Profile& p, const std::string& w) {
    std::ostringstream out;
    out << "Fingerprint " << name << '\n';
    out << "Class " << spec.vendor << " | " << spec.family << " | " << line << " | " << spec.purpose << '\n';
    for (auto t : {TestId::TSeq, TestId::T1, TestId::T2, TestId::T3, TestId::T4, TestId::T5, TestId::T6, TestId::T7,
                   TestId::PU}) {
        const auto it = p.find(t);
        if (it != p.end()) out << format_test(t, it->second, w) << '\n';
    }
    return out.str();
}

std::string version_text(const std::string& line, Rng& rng) {
    if (line.size() >= 2 && line.substr(line.size() - 2) == ".X")
        return line.substr(0, line.size() - 1) + std::to_string(uniform_below(rng, 24));
    if (line == "X" || line.empty()) return std::to_string(1 + uniform_below(rng, 9));
    return line;
}

const std::vector<std::string> kVariants = {"",        " (x86)",     " (SPARC)",   " (i386)",   " w/ patches",
                                            " beta",   " (embedded)", " (PowerPC)", " SMP",      " (Alpha)"};

void emit_family(std::ostringstream& out, const FamilySpec& spec, std::size_t family_no, const SyntheticDbOptions& o,
                 std::set<std::string>& names) {
    Rng rng(derive_seed(o.seed, family_no));
    Profile base = random_base(rng);
    if (!spec.fixed.empty()) overlay(base, parse_profile(spec.fixed));

    std::vector<std::string> wpool;
    while (wpool.size() < 6) {
        const auto w = format_hex(uniform_between(rng, 0x100, 0xFFFF));
        if (std::find(wpool.begin(), wpool.end(), w) == wpool.end()) wpool.push_back(w);
    }

    auto candidates = mutable_domains(spec);
    shuffle(std::span<const Domain*>(candidates), rng);
    const auto nd = std::min(spec.discriminating, candidates.size());
    const std::vector<const Domain*> discriminating(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(nd));
    const std::vector<const Domain*> others(candidates.begin() + static_cast<std::ptrdiff_t>(nd), candidates.end());

    std::vector<Profile> groups;
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        Profile best;
        std::size_t best_gap = 0;
        for (int attempt = 0; attempt < 50; ++attempt) {
            Profile p = base;
            if (g > 0 || spec.groups.size() == 1)
                for (std::size_t m = 0; m < spec.group_mutations && nd > 0; ++m) mutate(p, *pick(discriminating, rng), rng);
            std::size_t gap = 99;
            for (const auto& q : groups) gap = std::min(gap, profile_distance(p, q));
            if (attempt == 0 || gap > best_gap) {
                best = p;
                best_gap = gap;
            }
            if (gap >= 2) break;
        }
        groups.push_back(best);
    }

    const auto scale = std::max(o.density, 0.0);
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        const auto& gs = spec.groups[g];
        std::vector<std::string> gpool = {pick(wpool, rng), pick(wpool, rng)};
        const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(gs.count * scale)));
        for (std::size_t i = 0; i < count; ++i) {
            Profile p = groups[g];
            const auto extra = others.empty() ? 0 : uniform_below(rng, spec.extra_mutations + 1);
            for (std::size_t m = 0; m < extra; ++m) mutate(p, *pick(others, rng), rng);
            for (const char* field : {"Class", "IPID"}) {
                if (uniform_unit(rng) >= spec.alternatives) continue;
                const auto& d = *std::find_if(domains().begin(), domains().end(), [&](const Domain& x) {
                    return x.test == TestId::TSeq && x.field == field;
                });
                auto& v = p[TestId::TSeq][field];
                const auto& alt = pick(d.values, rng);
                if (alt != v) v += "|" + alt;
            }
            p[TestId::TSeq]["gcd"] = pick(kGcdChoices, rng);
            p[TestId::TSeq]["SI"] = pick(kSiChoices, rng);
            std::string w = pick(gpool, rng);
            if (uniform_below(rng, 3) == 0) {
                const auto& alt = pick(wpool, rng);
                if (alt != w) w += "|" + alt;
            }
            std::string name = i < gs.names.size() ? gs.names[i]
                                                   : spec.name_prefix + " " + version_text(gs.line, rng) + pick(kVariants, rng);
            for (int k = 2; names.contains(name); ++k) name = name + " #" + std::to_string(k);
            names.insert(name);
            out << format_signature(name, spec, gs.line, p, w) << '\n';
        }
    }
    for (const auto& ref : spec.references) out << ref << '\n';
}

std::vector<FamilySpec> relevant_families() {
    std::vector<FamilySpec> f;
    {
        auto s = family_spec("Microsoft", "Windows", "general purpose", "Microsoft Windows");
        s.groups = {{"NT/2K/XP", 16,
                     {"Microsoft Windows 2000 Professional", "Microsoft Windows 2000 Server SP1",
                      "Microsoft Windows 2000 Advanced Server SP4", "Microsoft Windows XP Professional SP1",
                      "Microsoft Windows XP Home SP2", "Microsoft Windows NT 4.0 Server SP6a",
                      "Microsoft Windows NT 4.0 Enterprise Server SP6", "Microsoft Windows 2000 Server SP3"}},
                    {"2003/.NET", 6,
                     {"Microsoft Windows Server 2003 Standard Edition", "Microsoft Windows Server 2003 Web Edition",
                      "Microsoft Windows Server 2003 Enterprise Edition"}},
                    {"95/98/ME", 6, {"Microsoft Windows 98 SE", "Microsoft Windows 95", "Microsoft Windows Millennium Edition"}},
                    {"CE", 4, {"Microsoft Windows CE 4.2", "Microsoft Pocket PC 2002"}}};
        s.fixed =
            "T1(DF=Y%W=@%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T2(Resp=Y%DF=N%W=0%ACK=S%Flags=AR%Ops=)\n"
            "T3(Resp=Y%DF=Y%W=@%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T4(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T5(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "T6(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T7(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "TSeq(Class=TR%IPID=I%TS=0)\n"
            "PU(DF=N%TOS=0%IPLEN=B0%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)\n";
        f.push_back(s);
    }
    {
        auto s = family_spec("Linux", "Linux", "general purpose", "Linux");
        for (const char* line : {"1.X", "2.0.X", "2.1.X", "2.2.X", "2.3.X", "2.4.X", "2.5.X", "2.6.X"})
            s.groups.push_back({line, 6, {}});
        s.fixed =
            "T1(DF=Y%W=@%ACK=S++%Flags=AS%Ops=MNNTNW)\n"
            "T2(Resp=N)\n"
            "T3(Resp=Y%DF=Y%W=@%ACK=S++%Flags=AS%Ops=MNNTNW)\n"
            "T4(DF=Y%W=0%ACK=O%Flags=R%Ops=)\n"
            "T5(DF=Y%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "T6(DF=Y%W=0%ACK=O%Flags=R%Ops=)\n"
            "T7(DF=Y%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "TSeq(Class=RI%IPID=Z%TS=1000HZ)\n"
            "PU(DF=N%TOS=C0%IPLEN=164%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)\n";
        s.discriminating = 10;
        s.references = {
            "Fingerprint Linux 2.6.0-test5 x86\n"
            "Class Linux | Linux | 2.6.X | general purpose\n"
            "TSeq(Class=RI%gcd=<6%SI=<2D3CFA0&>73C6B%IPID=Z%TS=1000HZ)\n"
            "T1(DF=Y%W=16A0%ACK=S++%Flags=AS%Ops=MNNTNW)\n"
            "T2(Resp=N)\n"
            "T3(Resp=Y%DF=Y%W=16A0%ACK=S++%Flags=AS%Ops=MNNTNW)\n"
            "T4(DF=Y%W=0%ACK=O%Flags=R%Ops=)\n"
            "T5(DF=Y%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "T6(DF=Y%W=0%ACK=O%Flags=R%Ops=)\n"
            "T7(DF=Y%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "PU(DF=N%TOS=C0%IPLEN=164%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)\n"};
        f.push_back(s);
    }
    {
        auto s = family_spec("Sun", "Solaris", "general purpose", "Sun Solaris");
        for (const char* line : {"2.X", "2.5.X", "7", "8", "9"}) s.groups.push_back({line, 5, {}});
        f.push_back(s);
    }
    {
        auto s = family_spec("OpenBSD", "OpenBSD", "general purpose", "OpenBSD");
        s.groups = {{"2.X", 10, {}}, {"3.X", 10, {}}, {"4.X", 10, {}}};
        s.fixed =
            "T1(DF=N%W=@%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T2(Resp=N)\n"
            "T3(Resp=Y%DF=N%W=@%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T4(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T5(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "T6(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T7(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "TSeq(Class=RI%IPID=RD%TS=2HZ)\n"
            "PU(DF=N%TOS=0%IPLEN=38%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)\n";
        s.frozen = {TestId::T5};
        s.references = {
            "Fingerprint OpenBSD 3.6 (i386)\n"
            "Class OpenBSD | OpenBSD | 3.X | general purpose\n"
            "TSeq(Class=RI%gcd=1%SI=<1F4%IPID=RD%TS=2HZ)\n"
            "T1(DF=N%W=4000%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T2(Resp=N)\n"
            "T3(Resp=N)\n"
            "T4(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T5(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "T6(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T7(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "PU(DF=N%TOS=0%IPLEN=38%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)\n",
            "Fingerprint OpenBSD 2.2 - 2.3\n"
            "Class OpenBSD | OpenBSD | 2.X | general purpose\n"
            "TSeq(Class=RI%gcd=1%SI=<1F4%IPID=RD%TS=2HZ)\n"
            "T1(DF=N%W=402E%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T2(Resp=N)\n"
            "T3(Resp=Y%DF=N%W=402E%ACK=S++%Flags=AS%Ops=MNWNNT)\n"
            "T4(DF=N%W=4000%ACK=O%Flags=R%Ops=)\n"
            "T5(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "T6(DF=N%W=0%ACK=O%Flags=R%Ops=)\n"
            "T7(DF=N%W=0%ACK=S++%Flags=AR%Ops=)\n"
            "PU(DF=N%TOS=0%IPLEN=38%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)\n"};
        f.push_back(s);
    }
    {
        auto s = family_spec("FreeBSD", "FreeBSD", "general purpose", "FreeBSD");
        for (const char* line : {"2.X", "3.X", "4.X", "5.X"}) s.groups.push_back({line, 5, {}});
        f.push_back(s);
    }
    {
        auto s = family_spec("NetBSD", "NetBSD", "general purpose", "NetBSD");
        s.groups = {{"1.X", 10, {}}, {"2.X", 10, {}}};
        f.push_back(s);
    }
    return f;
}

std::vector<FamilySpec> irrelevant_families() {
    auto two = [](const char* a, const char* b) {
        return std::vector<GroupSpec>{{a, 5, {}}, {b, 5, {}}};
    };
    return {
        family_spec("SGI", "IRIX", "general purpose", "SGI IRIX", two("5.X", "6.X")),
        family_spec("HP", "HP-UX", "general purpose", "HP-UX", two("10.X", "11.X")),
        family_spec("IBM", "AIX", "general purpose", "IBM AIX", two("4.X", "5.X")),
        family_spec("Cisco", "IOS", "router", "Cisco IOS", two("11.X", "12.X")),
        family_spec("Apple", "Mac OS X", "general purpose", "Apple Mac OS X", two("10.2.X", "10.3.X")),
        family_spec("Novell", "NetWare", "general purpose", "Novell NetWare", two("5.X", "6.X")),
        family_spec("HP", "embedded", "printer", "HP JetDirect printer", two("", "X")),
        family_spec("Sun", "SunOS", "general purpose", "SunOS", two("4.X", "X")),
        family_spec("Compaq", "Tru64 UNIX", "general purpose", "Tru64 UNIX", two("4.X", "5.X")),
        family_spec("BSDI", "BSD/OS", "general purpose", "BSDI BSD/OS", two("3.X", "4.X")),
        family_spec("3Com", "embedded", "switch", "3Com SuperStack switch", two("", "X")),
        family_spec("Nokia", "IPSO", "firewall", "Nokia IPSO firewall", two("3.X", "X")),
    };
}

// Appliances whose signature constrains only two or three tests.
void emit_sparse(std::ostringstream& out, const SyntheticDbOptions& o, std::set<std::string>& names) {
    struct Sparse {
        const char* name;
        const char* vendor;
        const char* family;
        const char* purpose;
    };
    const std::vector<Sparse> list = {{"Atari 2600 homebrew TCP/IP stack", "Atari", "embedded", "game console"},
                                      {"Brother HL-1270N printer", "Brother", "embedded", "printer"},
                                      {"Xerox DocuPrint N2125", "Xerox", "embedded", "printer"},
                                      {"Linksys BEFSR41 router", "Linksys", "embedded", "router"},
                                      {"Axis 2100 network camera", "Axis", "embedded", "webcam"},
                                      {"Ascend MAX TNT", "Ascend", "embedded", "terminal server"},
                                      {"Kyocera FS-1900 printer", "Kyocera", "embedded", "printer"},
                                      {"Netgear DG834 ADSL modem", "Netgear", "embedded", "broadband router"}};
    Rng rng(derive_seed(o.seed, 0x5A55E));
    for (const auto& s : list) {
        Profile full = random_base(rng);
        std::vector<TestId> tests(kAllTests.begin(), kAllTests.end());
        shuffle(std::span<TestId>(tests), rng);
        const auto keep = 2 + uniform_below(rng, 2);
        Profile p;
        for (std::size_t i = 0; i < keep; ++i) {
            auto fields = full[tests[i]];
            fields["Resp"] = "Y";
            if (tests[i] == TestId::TSeq) fields["SI"] = pick(kSiChoices, rng);
            // Keep a few fields of each test.
            for (auto it = fields.begin(); it != fields.end();)
                it = (it->first != "Resp" && uniform_unit(rng) < 0.4) ? fields.erase(it) : std::next(it);
            p[tests[i]] = fields;
        }
        const auto spec = family_spec(s.vendor, s.family, s.purpose, "");
        names.insert(s.name);
        out << format_signature(s.name, spec, "", p, format_hex(uniform_between(rng, 0x100, 0xFFFF))) << '\n';
    }
}

}  // namespace

std::string synthetic_fingerprint_text(const SyntheticDbOptions& options) {
    std::ostringstream out;
    out << "# Synthetic first-generation OS fingerprint database (seed " << options.seed << ")\n\n";
    std::set<std::string> names;
    std::size_t no = 0;
    for (const auto& f : relevant_families()) emit_family(out, f, no++, options, names);
    if (options.irrelevant)
        for (const auto& f : irrelevant_families()) emit_family(out, f, no++, options, names);
    if (options.sparse) emit_sparse(out, options, names);
    return out.str();
}

std::vector<Signature> synthetic_fingerprint_db(const SyntheticDbOptions& options) {
    return parse_fingerprint_db(synthetic_fingerprint_text(options));
}

std::vector<Signature> family_slice(const std::vector<Signature>& db, std::string_view family) {
    std::vector<Signature> out;
    for (const auto& s : db)
        if (s.primary_class().family == family) out.push_back(s);
    return out;
}

std::vector<Signature> take_per_family(const std::vector<Signature>& db, const std::vector<std::string>& families,
                                       std::size_t per_family) {
    std::map<std::string, std::size_t> taken;
    std::vector<Signature> out;
    for (const auto& s : db) {
        const auto& fam = s.primary_class().family;
        if (std::find(families.begin(), families.end(), fam) == families.end()) continue;
        if (taken[fam]++ < per_family) out.push_back(s);
    }
    return out;
}

}  // namespace osfp
