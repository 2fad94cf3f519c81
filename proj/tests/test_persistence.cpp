#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <functional>

#include <json.hpp>

#include "osfp/persistence.hpp"
#include "osfp/synthetic.hpp"
#include "support.hpp"

using namespace osfp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "osfp-test-persistence";
    fs::create_directories(dir);
    return dir / name;
}

void edit_json(const fs::path& p, const std::function<void(nlohmann::json&)>& f) {
    auto j = nlohmann::json::parse(read_text(p.string()));
    f(j);
    std::ofstream(p) << j.dump();
}

}  // namespace

TEST_CASE("FNV-1a 64") {
    // published test vectors
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("mlp round trip is bit exact") {
    auto net = init_weights({5, 4, 3}, 11);
    net.weights(0)(0, 0) = 0.1 + 0.2;  // not representable in short decimal
    const auto p = scratch("net.json");
    save_mlp(net, p, {42, "abc"});
    const auto back = load_mlp(p);
    CHECK(back == net);
    CHECK(container_kind(p) == "mlp");
    CHECK(container_meta(p).seed == 42);
    CHECK(container_meta(p).config_digest == "abc");
}

TEST_CASE("tampering and mismatches") {
    const auto net = init_weights({3, 2, 1}, 1);
    const auto p = scratch("tamper.json");

    save_mlp(net, p);
    edit_json(p, [](auto& j) { j["body"]["weights"][0]["data"][0] = 0.5; });
    CHECK_THROWS_AS(load_mlp(p), IntegrityError);

    save_mlp(net, p);
    edit_json(p, [](auto& j) { j["format_version"] = 99; });
    CHECK_THROWS_AS(load_mlp(p), VersionError);

    save_mlp(net, p);
    CHECK_THROWS_AS(load_pipeline(p), KindError);

    std::ofstream(p) << "{not json";
    CHECK_THROWS_AS(load_mlp(p), IntegrityError);
    CHECK_THROWS_AS(load_mlp(scratch("missing.json")), PersistenceError);
}

TEST_CASE("pipeline and dataset round trip") {
    const auto db = take_per_family(synthetic_fingerprint_db(), {kFamilies.begin(), kFamilies.end()}, 3);
    const auto data = generate_dataset(db, PrevalenceTable::uniform(), 90, Stage::family_stage(), 8);
    const auto pipeline = fit_reduction(data.inputs);
    const auto pp = scratch("pipeline.json");
    save_pipeline(pipeline, pp);
    CHECK(load_pipeline(pp) == pipeline);

    const auto dp = scratch("data.json");
    save_dataset(data, dp);
    const auto back = load_dataset(dp);
    CHECK(back.inputs == data.inputs);
    CHECK(back.targets == data.targets);
    CHECK(back.labels == data.labels);
    CHECK(back.output_labels == data.output_labels);
    CHECK(back.stage == data.stage);
    CHECK(back.seed == data.seed);
    CHECK(back.layout_id == data.layout_id);
}

TEST_CASE("hierarchy round trip") {
    const auto db = synthetic_fingerprint_db();
    HierarchyConfig cfg;
    cfg.train.generations = 5;
    cfg.windows_copies = 2;
    cfg.windows_train.generations = 5;
    const auto model = train_hierarchy(db, PrevalenceTable::uniform(), 700, cfg);
    const auto p = scratch("model.json");
    save_hierarchy(model, p, {cfg.seed, "d"});
    const auto back = load_hierarchy(p);
    CHECK(back == model);
    CHECK(container_kind(p) == "hierarchy");

    const auto sp = scratch("stage.json");
    save_stage(model.family, sp);
    CHECK(load_stage(sp) == model.family);
    const auto wp = scratch("windows.json");
    save_windows(*model.windows, wp);
    CHECK(load_windows(wp) == *model.windows);
}

TEST_CASE("writes leave no temporary files behind") {
    const auto dir = fs::temp_directory_path() / "osfp-test-atomic";
    fs::remove_all(dir);
    fs::create_directories(dir);
    save_mlp(init_weights({2, 1}, 1), dir / "a.json");
    save_mlp(init_weights({2, 1}, 2), dir / "a.json");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    CHECK(n == 1);
    CHECK(load_mlp(dir / "a.json") == init_weights({2, 1}, 2));
}
