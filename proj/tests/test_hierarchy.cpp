#include <doctest.h>

#include "osfp/hierarchy.hpp"
#include "osfp/synthetic.hpp"
#include "support.hpp"

using namespace osfp;

namespace {

HierarchyConfig quick_config() {
    HierarchyConfig cfg;
    cfg.train.generations = 40;
    cfg.windows_copies = 4;
    cfg.windows_hidden = 30;
    cfg.windows_train.generations = 120;
    cfg.seed = 3;
    return cfg;
}

const HierarchyModel& shared_model() {
    static const HierarchyModel model = [] {
        const auto db = synthetic_fingerprint_db();
        return train_hierarchy(db, PrevalenceTable::uniform(), 1500, quick_config());
    }();
    return model;
}

}  // namespace

TEST_CASE("reference topology table") {
    const auto& t = reference_topology();
    REQUIRE(t.size() == 5);
    CHECK(t[0].stage == "relevance");
    CHECK(t[0].kept == 204);
    CHECK(t[0].inputs == 96);
    CHECK(t[0].hidden == 20);
    CHECK(t[0].outputs == 1);
    CHECK(t[4].stage == "version:OpenBSD");
    CHECK(t[4].inputs == 23);
    const HierarchyConfig cfg;
    CHECK(cfg.hidden_for(Stage::family_stage()) == 20);
    CHECK(cfg.hidden_for(Stage::version("Solaris")) == 7);
    CHECK(cfg.hidden_for(Stage::version("NetBSD")) == 6);
}

TEST_CASE("Wilson interval") {
    // 8 of 10 at 95%: [0.4902, 0.9433]
    const Proportion p{8, 10};
    const auto [lo, hi] = p.interval();
    CHECK(lo == doctest::Approx(0.4902).epsilon(2e-4));
    CHECK(hi == doctest::Approx(0.9433).epsilon(2e-4));
    const auto [l0, h0] = Proportion{0, 20}.interval();
    CHECK(l0 == 0.0);
    CHECK(h0 == doctest::Approx(0.1611).epsilon(2e-3));
}

TEST_CASE("trained hierarchy shape") {
    const auto& m = shared_model();
    CHECK_NOTHROW(m.check());
    CHECK(m.relevance.net.output_size() == 1);
    CHECK(m.family.net.output_size() == 6);
    CHECK(m.family_labels.size() == 6);
    CHECK_FALSE(m.versions.contains("Windows"));
    CHECK(m.versions.contains("Linux"));
    CHECK(m.versions.contains("OpenBSD"));
    REQUIRE(m.windows.has_value());
    CHECK(m.windows->net.output_size() == 25);
    for (const auto& [fam, s] : m.versions) {
        CHECK(s.stage == Stage::version(fam));
        CHECK(s.net.input_size() == s.pipeline.output_size());
        CHECK(s.net.output_size() == Eigen::Index(s.labels.size()));
    }
}

TEST_CASE("held-out evaluation") {
    const auto& m = shared_model();
    const auto db = synthetic_fingerprint_db();
    const auto test = generate_dataset(db, PrevalenceTable::uniform(), 600, Stage::relevance(), 99);
    const auto rep = evaluate(m, test);
    CHECK(rep.relevance.total == 600);
    CHECK(rep.relevance.value() >= 0.9);
    CHECK(rep.family.value() >= 0.85);
    CHECK(rep.perfect + rep.partial + rep.error + rep.no_answer == 600);
    const auto text = format_evaluation(m, rep);
    CHECK(text.find("Stage accuracy") != std::string::npos);
    CHECK(text.find("perfect match") != std::string::npos);
}

TEST_CASE("cascade verdicts") {
    const auto& m = shared_model();
    const auto db = synthetic_fingerprint_db();
    const auto solaris = parse_observation(read_text(data_path("solaris8.obs")));
    const auto r = classify(m, solaris);
    CHECK(r.stage_trace == std::vector<std::string>{"relevance", "family", "version:Solaris"});
    CHECK(r.verdict.kind == VerdictKind::Classified);
    CHECK(r.verdict.family == "Solaris");
    const auto report = format_report(m, r);
    CHECK(report.find("Operating System analysis") != std::string::npos);
    CHECK(report.find("Solaris version analysis") != std::string::npos);

    const auto win = parse_observation(read_text(data_path("win2000.obs")));
    const auto no_dump = classify(m, win);
    CHECK(no_dump.verdict.family == "Windows");
    CHECK_FALSE(no_dump.verdict.version.has_value());
    CHECK_FALSE(no_dump.verdict.note.empty());

    const auto dump = parse_endpoint_dump(read_text(data_path("win2000-server-sp1.dump")));
    const auto with_dump = classify(m, win, &dump);
    CHECK(with_dump.stage_trace.back() == "dcerpc");
    REQUIRE(with_dump.verdict.windows.has_value());
    CHECK(with_dump.verdict.describe() == "Windows 2000 Server sp1");
    CHECK(format_report(m, with_dump).find("Setting OS to Windows 2000 Server sp1") != std::string::npos);

    CHECK_THROWS_AS(classify(m, Eigen::VectorXd::Zero(10)), std::invalid_argument);
}

TEST_CASE("thresholds gate the verdict") {
    auto m = shared_model();
    const auto solaris = parse_observation(read_text(data_path("solaris8.obs")));
    m.thresholds.relevance = 1.1;
    CHECK(classify(m, solaris).verdict.kind == VerdictKind::NotRelevant);
    CHECK(classify(m, solaris).verdict.describe() == "not relevant");
    m.thresholds.relevance = -1.1;
    m.thresholds.decision = 1.1;
    const auto r = classify(m, solaris);
    CHECK(r.verdict.kind == VerdictKind::Unknown);
    CHECK(format_report(m, r).find("Verdict: unknown") != std::string::npos);
}

TEST_CASE("version nets need at least two rows") {
    const auto db = take_per_family(synthetic_fingerprint_db(), {kFamilies.begin(), kFamilies.end()}, 2);
    auto cfg = quick_config();
    cfg.with_windows = false;
    cfg.train.generations = 5;
    const auto data = generate_dataset(db, PrevalenceTable::uniform(), 13, Stage::relevance(), 4);
    const auto m = train_hierarchy(data, cfg);
    CHECK_FALSE(m.windows.has_value());
    for (const auto& [fam, s] : m.versions) CHECK(restage(data, Stage::version(fam)).size() >= 2);
}
