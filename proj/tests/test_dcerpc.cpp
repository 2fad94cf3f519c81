#include <doctest.h>

#include <set>

#include "osfp/dcerpc.hpp"
#include "osfp/encoding.hpp"
#include "support.hpp"

using namespace osfp;

TEST_CASE("standard label space has 25 outputs grouped per version") {
    const auto s = WindowsLabelSpace::standard();
    REQUIRE(s.versions.size() == 4);
    // NT4 1+2+2, 2000 1+3+5, 2003 1+3+1, XP 1+2+3
    CHECK(s.total_outputs() == 25);
    CHECK(s.version_neuron(0) == 0);
    CHECK(s.edition_neuron(0, 1) == 2);
    CHECK(s.sp_neuron(0, 1) == 4);
    CHECK(s.version_neuron(1) == 5);
    CHECK(s.edition_neuron(1, 0) == 6);
    CHECK(s.sp_neuron(1, 0) == 9);
    CHECK(s.sp_neuron(1, 4) == 13);
    CHECK(s.version_neuron(2) == 14);
    CHECK(s.sp_neuron(2, 0) == 18);
    CHECK(s.version_neuron(3) == 19);
    CHECK(s.sp_neuron(3, 2) == 24);
}

TEST_CASE("targets and decoding") {
    const auto s = WindowsLabelSpace::standard();
    const WindowsLabel label{"2000", "Server", "1"};
    const Eigen::VectorXd t = windows_target(s, label);
    CHECK(t.sum() == doctest::Approx(3.0 - 22.0));
    CHECK(t[5] == 1.0);
    CHECK(t[6] == 1.0);
    CHECK(t[10] == 1.0);

    const auto v = decode_windows(s, t);
    CHECK(v.label == label);
    CHECK_FALSE(v.low_confidence);
    CHECK(label.describe() == "2000 Server sp1");

    Eigen::VectorXd weak = Eigen::VectorXd::Constant(25, -1.0);
    weak[19] = 0.2;
    weak[21] = 0.1;
    const auto w = decode_windows(s, weak);
    CHECK(w.label.version == "XP");
    CHECK(w.label.edition == "Home");
    CHECK(w.low_confidence);
}

TEST_CASE("the fresh 2000 Professional template is the reference dump") {
    const auto ref = parse_endpoint_dump(read_text(data_path("win2000-pro-sp0.dump")));
    const auto tpl = windows_template({"2000", "Professional", "0"});
    CHECK(tpl.programs.size() == 3);
    CHECK(tpl.binding_count() == 8);
    std::set<std::string> a, b;
    for (const auto& p : ref.programs) a.insert(p.uuid);
    for (const auto& p : tpl.programs) b.insert(p.uuid);
    CHECK(a == b);
}

TEST_CASE("templates of the space are pairwise distinct") {
    const auto s = WindowsLabelSpace::standard();
    std::set<std::string> seen;
    std::size_t n = 0;
    for (const auto& v : s.versions)
        for (const auto& e : v.editions)
            for (const auto& sp : v.service_packs) {
                seen.insert(serialize_endpoint_dump(windows_template({v.name, e, sp})));
                ++n;
            }
    CHECK(n == 2 * 2 + 3 * 5 + 3 * 1 + 2 * 3);
    CHECK(seen.size() == n);
    CHECK_THROWS(windows_template({"95", "Home", "0"}));
    CHECK_THROWS(windows_template({"2000", "Home", "0"}));
}

TEST_CASE("corpus dropout and replay") {
    const auto s = WindowsLabelSpace::standard();
    const auto corpus = synthetic_windows_corpus(s, 6, 0.1, 3);
    CHECK(corpus.size() == 28 * 6);
    CHECK(corpus[0].dump == windows_template(corpus[0].label));
    const auto again = synthetic_windows_corpus(s, 6, 0.1, 3);
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(again[i].dump == corpus[i].dump);

    TrainConfig cfg;
    cfg.generations = 150;
    const auto module = train_windows_module(corpus, s, 30, cfg, 5);
    CHECK(module.net.input_size() == Eigen::Index(module.schema.total));
    CHECK(module.net.output_size() == 25);
    std::size_t hits = 0;
    for (const auto& d : corpus) {
        const auto v = classify_windows(module.net, module.schema, module.labels, d.dump);
        if (v.label == d.label) ++hits;
    }
    CHECK(double(hits) / double(corpus.size()) >= 0.9);

    const auto report = format_windows_report(
        s, classify_windows(module.net, module.schema, module.labels, windows_template({"2000", "Server", "1"})));
    CHECK(report.find("Neural Network Output (close to 1 is better):") != std::string::npos);
    CHECK(report.find("Windows 2000:") != std::string::npos);
    CHECK(report.find("Setting OS to Windows 2000 Server sp1") != std::string::npos);

    EndpointMap alien;
    alien.programs.push_back({"00000000-1111-2222-3333-444444444444", std::nullopt, {{"ncalrpc", "x"}}});
    CHECK(classify_windows(module.net, module.schema, module.labels, alien).low_confidence);
}
