#include <doctest.h>

#include <map>
#include <set>

#include "osfp/datagen.hpp"
#include "osfp/synthetic.hpp"
#include "support.hpp"

using namespace osfp;

TEST_CASE("default database composition") {
    const auto db = synthetic_fingerprint_db();
    CHECK(db.size() == 306);
    std::map<std::string, std::size_t> per;
    std::set<std::string> names;
    for (const auto& s : db) {
        ++per[s.primary_class().family];
        names.insert(s.name);
    }
    CHECK(names.size() == db.size());
    CHECK(per.at("Windows") == 32);
    CHECK(per.at("Linux") == 49);
    CHECK(per.at("Solaris") == 25);
    CHECK(per.at("OpenBSD") == 32);
    CHECK(per.at("FreeBSD") == 20);
    CHECK(per.at("NetBSD") == 20);
    CHECK(per.at("embedded") == 28);
}

TEST_CASE("shipped database matches the generator") {
    CHECK(read_text(data_path("nmap-os-fingerprints")) == synthetic_fingerprint_text());
}

TEST_CASE("reference signatures are present verbatim") {
    const auto db = synthetic_fingerprint_db();
    const Signature* lin = nullptr;
    for (const auto& s : db)
        if (s.name == "Linux 2.6.0-test5 x86") lin = &s;
    REQUIRE(lin != nullptr);
    const auto ref = parse_fingerprint_db(R"(Fingerprint Linux 2.6.0-test5 x86
Class Linux | Linux | 2.6.X | general purpose
TSeq(Class=RI%gcd=<6%SI=<2D3CFA0&>73C6B%IPID=Z%TS=1000HZ)
T1(DF=Y%W=16A0%ACK=S++%Flags=AS%Ops=MNNTNW)
T2(Resp=N)
T3(Resp=Y%DF=Y%W=16A0%ACK=S++%Flags=AS%Ops=MNNTNW)
T4(DF=Y%W=0%ACK=O%Flags=R%Ops=)
T5(DF=Y%W=0%ACK=S++%Flags=AR%Ops=)
T6(DF=Y%W=0%ACK=O%Flags=R%Ops=)
T7(DF=Y%W=0%ACK=S++%Flags=AR%Ops=)
PU(DF=N%TOS=C0%IPLEN=164%RIPTL=148%RID=E%RIPCK=E%UCK=E%ULEN=134%DAT=E)
)");
    CHECK(*lin == ref[0]);
}

TEST_CASE("options") {
    SyntheticDbOptions o;
    o.irrelevant = false;
    o.sparse = false;
    const auto db = synthetic_fingerprint_db(o);
    for (const auto& s : db) CHECK(is_relevant(s));
    o.seed = 9;
    CHECK(synthetic_fingerprint_text(o) != synthetic_fingerprint_text());
    o = {};
    o.density = 2.0;
    CHECK(synthetic_fingerprint_db(o).size() > 306);
}

TEST_CASE("sparse signatures constrain few tests") {
    const auto db = synthetic_fingerprint_db();
    std::size_t sparse = 0;
    for (const auto& s : db)
        if (s.tests.size() <= 3) ++sparse;
    CHECK(sparse == 8);
}

TEST_CASE("slices") {
    const auto db = synthetic_fingerprint_db();
    const auto obsd = family_slice(db, "OpenBSD");
    CHECK(obsd.size() == 32);
    for (const auto& s : obsd) CHECK(s.primary_class().family == "OpenBSD");
    const auto toy = take_per_family(db, {kFamilies.begin(), kFamilies.end()}, 20);
    CHECK(toy.size() == 120);
    const auto few = take_per_family(db, {"FreeBSD", "Nope"}, 50);
    CHECK(few.size() == 20);
}
