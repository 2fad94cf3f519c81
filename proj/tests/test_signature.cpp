#include <doctest.h>

#include <algorithm>
#include <variant>

#include "osfp/signature.hpp"
#include "support.hpp"

using namespace osfp;

namespace {

const char* kLinux = R"(# comment
Fingerprint Linux 2.6.0-test5 x86
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
)";

const FieldConstraint& rule(const Signature& sig, TestId t, const std::string& field) {
    for (const auto& r : sig.tests.at(t))
        if (r.field == field) return r;
    throw std::out_of_range(field);
}

}  // namespace

TEST_CASE("parse a full signature") {
    const auto db = parse_fingerprint_db(kLinux);
    REQUIRE(db.size() == 1);
    const auto& sig = db[0];
    CHECK(sig.name == "Linux 2.6.0-test5 x86");
    CHECK(sig.primary_class() == OsClass{"Linux", "Linux", "2.6.X", "general purpose"});
    CHECK(sig.tests.size() == 9);
    // 5 + 5 + 1 + 6 + 5*4 + 9
    CHECK(sig.rule_count() == 46);

    CHECK(std::get<Const>(rule(sig, TestId::T1, "ACK").constraint).value == "S++");
    CHECK(std::get<Const>(rule(sig, TestId::T4, "Ops").constraint).value.empty());

    const auto& gcd = std::get<Comparison>(rule(sig, TestId::TSeq, "gcd").constraint);
    CHECK(gcd.op == Comparison::Op::Less);
    CHECK(gcd.bound == 6);

    const auto& si = std::get<AllOf>(rule(sig, TestId::TSeq, "SI").constraint);
    REQUIRE(si.terms.size() == 2);
    CHECK(si.terms[0].bound == 0x2D3CFA0);
    CHECK(si.terms[1].op == Comparison::Op::Greater);
    CHECK(si.terms[1].bound == 0x73C6B);
}

TEST_CASE("comparison bounds are hexadecimal") {
    const auto db = parse_fingerprint_db("Fingerprint X\nClass a | b | c | d\nTSeq(gcd=<40)\n");
    const auto& c = std::get<Comparison>(rule(db[0], TestId::TSeq, "gcd").constraint);
    CHECK(c.bound == 64);
    CHECK(constraint_matches(c, "gcd", "3F"));
    CHECK_FALSE(constraint_matches(c, "gcd", "40"));
}

TEST_CASE("alternatives and hex normalization") {
    const auto db = parse_fingerprint_db("Fingerprint X\nClass a | b | c | d\nT1(W=16a0|7FFF%Flags=AS|A)\n");
    const auto& w = std::get<OneOf>(rule(db[0], TestId::T1, "W").constraint);
    CHECK(w.values == std::vector<std::string>{"16A0", "7FFF"});
    CHECK(constraint_matches(w, "W", "16a0"));
    CHECK(constraint_matches(w, "W", "7FFF"));
    CHECK_FALSE(constraint_matches(w, "W", "0"));
    CHECK(constraint_matches(rule(db[0], TestId::T1, "Flags").constraint, "Flags", "A"));
}

TEST_CASE("serialize round trip") {
    const auto db = parse_fingerprint_db(kLinux);
    const auto again = parse_fingerprint_db(serialize_fingerprint_db(db));
    CHECK(again == db);
}

TEST_CASE("parse errors carry the line number") {
    auto line_of = [](const char* text) -> std::size_t {
        try {
            parse_fingerprint_db(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("Class a | b | c | d\n") == 1);
    CHECK(line_of("Fingerprint X\nClass a | b | c\n") == 2);
    CHECK(line_of("Fingerprint X\nT1(DF=Y)\n\nT1(DF=N)\n") == 4);
    CHECK(line_of("Fingerprint X\nT9(DF=Y)\n") == 2);
    CHECK(line_of("Fingerprint X\nTSeq(gcd=<zz)\n") == 2);
    CHECK(line_of("Fingerprint X\nT1(W=<5|7)\n") == 2);
    CHECK(line_of("T1(DF=Y)\n") == 1);
}

TEST_CASE("unknown fields warn and always match") {
    std::vector<ParseWarning> warnings;
    const auto db = parse_fingerprint_db("Fingerprint X\nClass a | b | c | d\nT1(DF=Y%Q=zz)\n", &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].line == 3);
    CHECK(std::holds_alternative<Any>(rule(db[0], TestId::T1, "Q").constraint));
}

TEST_CASE("observation parsing") {
    const auto obs = parse_observation(read_text(data_path("solaris8.obs")));
    CHECK(obs.source == "Sun Solaris 8 SMP");
    CHECK(obs.tests.size() == 9);
    CHECK(obs.tests.at(TestId::T1).at("W") == "A0B6");
    CHECK(obs.tests.at(TestId::TSeq).at("Class") == "i800");
    CHECK(parse_observation(serialize_observation(obs)) == obs);
    CHECK_THROWS_AS(parse_observation("T1(W=<5)\n"), ParseError);

    const auto many = parse_observations("Observation a\nT1(DF=Y)\nObservation b\nT2(DF=N)\n");
    REQUIRE(many.size() == 2);
    CHECK(many[1].source == "b");
}

TEST_CASE("match score counts considered rules only") {
    const auto db = parse_fingerprint_db(kLinux);
    Observation obs;
    obs.tests[TestId::T1] = {{"DF", "Y"}, {"W", "16A0"}, {"ACK", "S++"}, {"Flags", "AS"}, {"Ops", "MNNTNW"}};
    CHECK(match_score(db[0], obs) == doctest::Approx(1.0));
    obs.tests[TestId::T1]["DF"] = "N";
    CHECK(match_score(db[0], obs) == doctest::Approx(4.0 / 5.0));
    obs.tests[TestId::TSeq] = {{"gcd", "1"}, {"SI", "100000"}};
    // gcd 1 < 6, SI 0x100000 in (0x73C6B, 0x2D3CFA0)
    CHECK(match_score(db[0], obs) == doctest::Approx(6.0 / 7.0));
    CHECK(match_score(db[0], Observation{}) == 0.0);
}

TEST_CASE("best fit is stable among ties") {
    auto db = parse_fingerprint_db(kLinux);
    db.push_back(db[0]);
    db[1].name = "copy";
    Observation obs;
    obs.tests[TestId::T2] = {{"Resp", "N"}};
    const auto m = best_fit(db, obs);
    REQUIRE(m.size() == 2);
    CHECK(m[0].index == 0);
    CHECK(m[1].index == 1);
}

TEST_CASE("hex helpers") {
    CHECK(parse_hex("ff") == 255u);
    CHECK(parse_hex("") == std::nullopt);
    CHECK(parse_hex("1g") == std::nullopt);
    CHECK(format_hex(0x16A0) == "16A0");
    CHECK(is_hex_field("W"));
    CHECK_FALSE(is_hex_field("DF"));
}

TEST_CASE("OpenBSD excerpts") {
    const auto db = parse_fingerprint_db(R"(Fingerprint OpenBSD 3.6 (i386)
Class OpenBSD | OpenBSD | 3.X | general purpose
T1(DF=N%W=4000%ACK=S++%Flags=AS%Ops=MNWNNT)
T2(Resp=N)
T3(Resp=N)
T4(DF=N%W=0%ACK=O%Flags=R%Ops=)
T5(DF=N%W=0%ACK=S++%Flags=AR%Ops=)

Fingerprint OpenBSD 2.2 - 2.3
Class OpenBSD | OpenBSD | 2.X | general purpose
T1(DF=N%W=402E%ACK=S++%Flags=AS%Ops=MNWNNT)
T2(Resp=N)
T3(Resp=Y%DF=N%W=402E%ACK=S++%Flags=AS%Ops=MNWNNT)
T4(DF=N%W=4000%ACK=O%Flags=R%Ops=)
T5(DF=N%W=0%ACK=S++%Flags=AR%Ops=)
)");
    REQUIRE(db.size() == 2);
    CHECK(db[0].name == "OpenBSD 3.6 (i386)");
    CHECK(std::get<Const>(rule(db[0], TestId::T1, "W").constraint).value == "4000");
    CHECK(std::get<Const>(rule(db[0], TestId::T1, "Ops").constraint).value == "MNWNNT");
    CHECK(std::get<Const>(rule(db[0], TestId::T2, "Resp").constraint).value == "N");
    CHECK(db[0].tests.at(TestId::T1).size() == 5);
    CHECK(db[1].primary_class().line == "2.X");
    CHECK(std::get<Const>(rule(db[1], TestId::T1, "W").constraint).value == "402E");
    CHECK(db[1].tests.at(TestId::T3).size() == 6);

    // the shipped database carries both with these tests unchanged
    const auto shipped = parse_fingerprint_db(read_text(data_path("nmap-os-fingerprints")));
    for (const auto& ref : db) {
        const auto it = std::find_if(shipped.begin(), shipped.end(), [&](const auto& s) { return s.name == ref.name; });
        REQUIRE(it != shipped.end());
        for (const auto& [t, rules] : ref.tests) CHECK(it->tests.at(t) == rules);
    }
}
