#include <doctest.h>

#include <set>

#include "osfp/datagen.hpp"
#include "osfp/encoding.hpp"
#include "osfp/synthetic.hpp"
#include "support.hpp"

using namespace osfp;

namespace {

Signature make(const std::string& name, const std::string& family, const std::string& line, const std::string& rules) {
    auto db = parse_fingerprint_db("Fingerprint " + name + "\nClass V | " + family + " | " + line + " | gp\n" + rules);
    return db.at(0);
}

}  // namespace

TEST_CASE("apportion by largest remainder") {
    const std::vector<double> w = {0.75, 0.25};
    CHECK(apportion(w, 100) == std::vector<std::size_t>{75, 25});
    // quotas 3.333.. each: one remainder seat goes to the first
    const std::vector<double> thirds = {1, 1, 1};
    CHECK(apportion(thirds, 10) == std::vector<std::size_t>{4, 3, 3});
    // 0.001 would round to 0 of 10; it takes one from the largest
    const std::vector<double> tiny = {0.999, 0.001};
    CHECK(apportion(tiny, 10) == std::vector<std::size_t>{9, 1});
    const std::vector<double> zero = {1, 0};
    CHECK(apportion(zero, 5) == std::vector<std::size_t>{5, 0});
}

TEST_CASE("prevalence resolution") {
    std::vector<Signature> db = {make("a1", "Linux", "2.4.X", "T1(DF=Y)\n"), make("a2", "Linux", "2.4.X", "T1(DF=Y)\n"),
                                 make("b", "Solaris", "8", "T1(DF=Y)\n"), make("c", "Other", "1", "T1(DF=Y)\n")};
    const auto table = PrevalenceTable::parse("# x\nLinux 6\nb 2\n* 1\n");
    const auto w = table.resolve(db);
    // 3 + 3 + 2 + 1 = 9
    CHECK(w[0] == doctest::Approx(3.0 / 9));
    CHECK(w[1] == doctest::Approx(3.0 / 9));
    CHECK(w[2] == doctest::Approx(2.0 / 9));
    CHECK(w[3] == doctest::Approx(1.0 / 9));

    const auto uni = PrevalenceTable::uniform().resolve(db);
    for (double x : uni) CHECK(x == doctest::Approx(0.25));

    CHECK_THROWS_AS(PrevalenceTable::parse("Linux x\n"), ParseError);
    CHECK_THROWS_AS(PrevalenceTable::parse("Linux -1\n"), ParseError);
    CHECK_THROWS_AS(PrevalenceTable::parse("Other 1\n").resolve({db[0]}), GenerationError);
}

TEST_CASE("shipped prevalence file parses") {
    const auto table = PrevalenceTable::parse(read_text(data_path("prevalence")));
    CHECK(table.weights.at("Windows") == 40.0);
    CHECK(table.weights.at("Linux 2.6.0-test5 x86") == 2.0);
}

TEST_CASE("stages") {
    CHECK(Stage::parse("relevance") == Stage::relevance());
    CHECK(Stage::parse("version:Linux").name() == "version:Linux");
    CHECK_THROWS(Stage::parse("version:Plan9"));
    CHECK_THROWS(Stage::parse("bogus"));

    const SampleLabel lin{true, "Linux", "2.4.X", "x"};
    const SampleLabel other{false, "Other", "1", "y"};
    CHECK(stage_accepts(Stage::relevance(), other));
    CHECK_FALSE(stage_accepts(Stage::family_stage(), other));
    CHECK(stage_accepts(Stage::version("Linux"), lin));
    CHECK_FALSE(stage_accepts(Stage::version("Solaris"), lin));

    const auto labels = stage_output_labels(Stage::family_stage(), {lin});
    CHECK(labels.size() == 6);
    const Eigen::VectorXd t = stage_target(Stage::family_stage(), labels, lin);
    CHECK(t == (Eigen::VectorXd(6) << -1, 1, -1, -1, -1, -1).finished());
    CHECK(stage_target(Stage::relevance(), {"relevant"}, other)[0] == -1.0);
}

TEST_CASE("samples satisfy their source") {
    const auto db = synthetic_fingerprint_db();
    Rng rng(3);
    for (std::size_t i = 0; i < db.size(); i += 7)
        for (int k = 0; k < 5; ++k) CHECK(match_score(db[i], sample_observation(db[i], rng)) == 1.0);
}

TEST_CASE("sampling draws inside ranges and alternatives") {
    const auto sig = make("s", "Linux", "2.4.X", "TSeq(SI=<20&>10%gcd=<2%Class=RI|TR)\nT2(Resp=N)\n");
    Rng rng(1);
    std::set<std::string> classes;
    for (int k = 0; k < 200; ++k) {
        const auto obs = sample_observation(sig, rng);
        const auto si = *parse_hex(obs.tests.at(TestId::TSeq).at("SI"));
        CHECK(si > 0x10);
        CHECK(si < 0x20);
        CHECK(obs.tests.at(TestId::TSeq).at("gcd") <= "1");
        classes.insert(obs.tests.at(TestId::TSeq).at("Class"));
        CHECK(obs.tests.at(TestId::T2).size() == 1);
    }
    CHECK(classes == std::set<std::string>{"RI", "TR"});

    const auto bad = make("b", "Linux", "2.4.X", "TSeq(SI=<5&>9)\n");
    CHECK_THROWS_AS(sample_observation(bad, rng), GenerationError);
}

TEST_CASE("generation is deterministic and apportioned") {
    const auto db = take_per_family(synthetic_fingerprint_db(), {kFamilies.begin(), kFamilies.end()}, 3);
    const auto a = generate_dataset(db, PrevalenceTable::uniform(), 180, Stage::family_stage(), 5);
    const auto b = generate_dataset(db, PrevalenceTable::uniform(), 180, Stage::family_stage(), 5);
    CHECK(a.inputs == b.inputs);
    CHECK(a.size() == 180);
    CHECK(a.inputs.cols() == 568);
    CHECK(a.targets.cols() == 6);
    CHECK(a.layout_id == kNmapLayoutId);
    std::map<std::string, int> per;
    for (const auto& l : a.labels) ++per[l.source];
    CHECK(per.size() == 18);
    for (const auto& [name, n] : per) CHECK(n == 10);

    const auto c = generate_dataset(db, PrevalenceTable::uniform(), 180, Stage::family_stage(), 6);
    CHECK(c.inputs != a.inputs);
    CHECK_THROWS_AS(generate_dataset(db, PrevalenceTable::uniform(), 5, Stage::family_stage(), 5), GenerationError);
}

TEST_CASE("split and restage") {
    const auto db = synthetic_fingerprint_db();
    const auto data = generate_dataset(db, PrevalenceTable::uniform(), 400, Stage::relevance(), 2);
    const auto [train, test] = split_dataset(data, 0.8, 9);
    CHECK(train.size() == 320);
    CHECK(test.size() == 80);

    const auto fam = restage(data, Stage::family_stage());
    for (const auto& l : fam.labels) CHECK(l.relevant);
    CHECK(fam.targets.cols() == 6);
    const auto lin = restage(data, Stage::version("Linux"));
    for (const auto& l : lin.labels) CHECK(l.family == "Linux");
    for (Eigen::Index r = 0; r < lin.targets.rows(); ++r) CHECK(lin.targets.row(r).sum() == doctest::Approx(2.0 - double(lin.targets.cols())));
}

TEST_CASE("comparison bounds are read as hex when sampling") {
    const auto sig = make("g", "Linux", "2.4.X", "TSeq(gcd=<64)\n");
    Rng rng(12);
    std::uint64_t lo = ~0ULL, hi = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto v = *parse_hex(sample_observation(sig, rng).tests.at(TestId::TSeq).at("gcd"));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // <0x64 admits 0 .. 99
    CHECK(hi <= 99);
    CHECK(hi > 63);
    CHECK(lo < 10);
}
