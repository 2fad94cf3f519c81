#include "osfp/persistence.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace osfp {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd json_matrix(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        throw IntegrityError("matrix shape does not match its data");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
    return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vector(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mlp_json(const Mlp& net) {
    json layers = json::array();
    for (const auto& w : net.all_weights()) layers.push_back(matrix_json(w));
    return {{"layer_sizes", net.layer_sizes()}, {"weights", layers}};
}

Mlp json_mlp(const json& j) {
    const auto sizes = j.at("layer_sizes").get<std::vector<Eigen::Index>>();
    Mlp net(sizes);
    const auto& layers = j.at("weights");
    if (layers.size() != net.layer_count()) throw IntegrityError("network layer count mismatch");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto w = json_matrix(layers[l]);
        if (w.rows() != net.weights(l).rows() || w.cols() != net.weights(l).cols())
            throw IntegrityError("network weight shape mismatch in layer " + std::to_string(l));
        net.weights(l) = std::move(w);
    }
    return net;
}

json pipeline_json(const ReductionPipeline<double>& p) {
    return {{"means", vector_json(p.normalizer.means)},
            {"stds", vector_json(p.normalizer.stds)},
            {"constant", p.normalizer.constant},
            {"kept", p.kept},
            {"basis", matrix_json(p.basis)},
            {"eigenvalues", vector_json(p.eigenvalues)},
            {"variance_kept", p.variance_kept}};
}

ReductionPipeline<double> json_pipeline(const json& j) {
    ReductionPipeline<double> p;
    p.normalizer.means = json_vector(j.at("means"));
    p.normalizer.stds = json_vector(j.at("stds"));
    p.normalizer.constant = j.at("constant").get<std::vector<bool>>();
    p.kept = j.at("kept").get<std::vector<Eigen::Index>>();
    p.basis = json_matrix(j.at("basis"));
    p.eigenvalues = json_vector(j.at("eigenvalues"));
    p.variance_kept = j.at("variance_kept").get<double>();
    const auto n = p.normalizer.means.size();
    if (p.normalizer.stds.size() != n || p.normalizer.constant.size() != static_cast<std::size_t>(n))
        throw IntegrityError("normalizer vectors differ in length");
    for (auto k : p.kept)
        if (k < 0 || k >= n) throw IntegrityError("kept column out of range");
    if (p.basis.rows() != static_cast<Eigen::Index>(p.kept.size())) throw IntegrityError("basis rows differ from kept columns");
    return p;
}

json history_json(const TrainHistory& h) {
    json fit = json::array();
    for (const auto& f : h.fitness) fit.push_back({{"generation", f.generation}, {"g", f.g}});
    return {{"mse", h.mse}, {"lambda", h.lambda}, {"fitness", fit}};
}

TrainHistory json_history(const json& j) {
    TrainHistory h;
    h.mse = j.at("mse").get<std::vector<double>>();
    h.lambda = j.at("lambda").get<std::vector<double>>();
    for (const auto& f : j.at("fitness")) h.fitness.push_back({f.at("generation").get<std::size_t>(), f.at("g").get<double>()});
    return h;
}

json stage_json(const StageNet& s) {
    return {{"stage", s.stage.name()},
            {"labels", s.labels},
            {"pipeline", pipeline_json(s.pipeline)},
            {"net", mlp_json(s.net)},
            {"history", history_json(s.history)}};
}

StageNet json_stage(const json& j) {
    StageNet s;
    s.stage = Stage::parse(j.at("stage").get<std::string>());
    s.labels = j.at("labels").get<std::vector<std::string>>();
    s.pipeline = json_pipeline(j.at("pipeline"));
    s.net = json_mlp(j.at("net"));
    s.history = json_history(j.at("history"));
    return s;
}

json windows_json(const WindowsModule& m) {
    json versions = json::array();
    for (const auto& v : m.labels.versions)
        versions.push_back({{"name", v.name}, {"editions", v.editions}, {"service_packs", v.service_packs}});
    json uuids = json::array();
    for (const auto& [uuid, n] : m.schema.uuid_neurons) uuids.push_back({{"uuid", uuid}, {"neuron", n}});
    json bindings = json::array();
    for (const auto& [key, n] : m.schema.binding_neurons)
        bindings.push_back({{"uuid", std::get<0>(key)},
                            {"protocol", std::get<1>(key)},
                            {"endpoint", std::get<2>(key)},
                            {"neuron", n}});
    return {{"labels", versions},
            {"schema", {{"uuids", uuids}, {"bindings", bindings}, {"total", m.schema.total}}},
            {"net", mlp_json(m.net)},
            {"history", history_json(m.history)}};
}

WindowsModule json_windows(const json& j) {
    WindowsModule m;
    for (const auto& v : j.at("labels"))
        m.labels.versions.push_back({v.at("name").get<std::string>(), v.at("editions").get<std::vector<std::string>>(),
                                     v.at("service_packs").get<std::vector<std::string>>()});
    const auto& s = j.at("schema");
    for (const auto& u : s.at("uuids")) m.schema.uuid_neurons[u.at("uuid").get<std::string>()] = u.at("neuron").get<std::size_t>();
    for (const auto& b : s.at("bindings"))
        m.schema.binding_neurons[{b.at("uuid").get<std::string>(), b.at("protocol").get<std::string>(),
                                  b.at("endpoint").get<std::string>()}] = b.at("neuron").get<std::size_t>();
    m.schema.total = s.at("total").get<std::size_t>();
    m.net = json_mlp(j.at("net"));
    m.history = json_history(j.at("history"));
    if (m.net.input_size() != static_cast<Eigen::Index>(m.schema.total) ||
        m.net.output_size() != m.labels.total_outputs())
        throw IntegrityError("endpoint network does not fit its schema and labels");
    return m;
}

json hierarchy_json(const HierarchyModel& m) {
    json versions = json::object();
    for (const auto& [family, s] : m.versions) versions[family] = stage_json(s);
    json j = {{"relevance", stage_json(m.relevance)},
              {"family", stage_json(m.family)},
              {"versions", versions},
              {"family_labels", m.family_labels},
              {"thresholds", {{"relevance", m.thresholds.relevance}, {"decision", m.thresholds.decision}}},
              {"layout_id", m.layout_id}};
    j["windows"] = m.windows ? windows_json(*m.windows) : json(nullptr);
    return j;
}

HierarchyModel json_hierarchy(const json& j) {
    HierarchyModel m;
    m.relevance = json_stage(j.at("relevance"));
    m.family = json_stage(j.at("family"));
    for (const auto& [family, s] : j.at("versions").items()) m.versions[family] = json_stage(s);
    m.family_labels = j.at("family_labels").get<std::vector<std::string>>();
    m.thresholds.relevance = j.at("thresholds").at("relevance").get<double>();
    m.thresholds.decision = j.at("thresholds").at("decision").get<double>();
    m.layout_id = j.at("layout_id").get<std::string>();
    if (!j.at("windows").is_null()) m.windows = json_windows(j.at("windows"));
    try {
        m.check();
    } catch (const std::invalid_argument& e) {
        throw IntegrityError(std::string("inconsistent hierarchy model: ") + e.what());
    }
    return m;
}

json dataset_json(const Dataset& d) {
    json labels = json::array();
    for (const auto& l : d.labels)
        labels.push_back({{"relevant", l.relevant}, {"family", l.family}, {"version_group", l.version_group}, {"source", l.source}});
    return {{"inputs", matrix_json(d.inputs)},
            {"targets", matrix_json(d.targets)},
            {"labels", labels},
            {"output_labels", d.output_labels},
            {"stage", d.stage.name()},
            {"seed", d.seed},
            {"layout_id", d.layout_id}};
}

Dataset json_dataset(const json& j) {
    Dataset d;
    d.inputs = json_matrix(j.at("inputs"));
    d.targets = json_matrix(j.at("targets"));
    for (const auto& l : j.at("labels"))
        d.labels.push_back({l.at("relevant").get<bool>(), l.at("family").get<std::string>(),
                            l.at("version_group").get<std::string>(), l.at("source").get<std::string>()});
    d.output_labels = j.at("output_labels").get<std::vector<std::string>>();
    d.stage = Stage::parse(j.at("stage").get<std::string>());
    d.seed = j.at("seed").get<std::uint64_t>();
    d.layout_id = j.at("layout_id").get<std::string>();
    if (d.inputs.rows() != static_cast<Eigen::Index>(d.labels.size()) || d.targets.rows() != d.inputs.rows())
        throw IntegrityError("dataset row counts disagree");
    return d;
}

void write_container(const std::filesystem::path& path, const std::string& kind, const ContainerMeta& meta,
                     const json& body) {
    const auto text = body.dump();
    json c = {{"format_version", kFormatVersion},
              {"kind", kind},
              {"metadata", {{"seed", meta.seed}, {"config_digest", meta.config_digest}}},
              {"digest", fnv1a_hex(text)},
              {"body", body}};
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PersistenceError("cannot write " + tmp.string());
        out << c.dump() << '\n';
        if (!out) throw PersistenceError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw PersistenceError("cannot move " + tmp.string() + " to " + path.string());
    }
}

json read_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistenceError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json c;
    try {
        c = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw IntegrityError(path.string() + ": not a valid container: " + e.what());
    }
    if (!c.is_object() || !c.contains("format_version") || !c.contains("kind") || !c.contains("body") ||
        !c.contains("digest"))
        throw IntegrityError(path.string() + ": not a valid container");
    if (!c["format_version"].is_number_integer() || c["format_version"].get<int>() != kFormatVersion)
        throw VersionError(path.string() + ": unsupported format_version " + c["format_version"].dump());
    if (!c["digest"].is_string() || c["digest"].get<std::string>() != fnv1a_hex(c["body"].dump()))
        throw IntegrityError(path.string() + ": body does not match its digest");
    return c;
}

template <typename F>
auto read_container(const std::filesystem::path& path, const std::string& kind, F decode) {
    const auto c = read_raw(path);
    const auto found = c["kind"].is_string() ? c["kind"].get<std::string>() : c["kind"].dump();
    if (found != kind) throw KindError(path.string() + ": holds a " + found + ", expected a " + kind);
    try {
        return decode(c["body"]);
    } catch (const json::exception& e) {
        throw IntegrityError(path.string() + ": malformed " + kind + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IntegrityError(path.string() + ": malformed " + kind + ": " + e.what());
    }
}

}  // namespace

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) h = (h ^ c) * 0x100000001B3ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string container_kind(const std::filesystem::path& path) {
    const auto c = read_raw(path);
    return c["kind"].is_string() ? c["kind"].get<std::string>() : c["kind"].dump();
}

ContainerMeta container_meta(const std::filesystem::path& path) {
    const auto c = read_raw(path);
    ContainerMeta m;
    if (c.contains("metadata")) {
        m.seed = c["metadata"].value("seed", std::uint64_t{0});
        m.config_digest = c["metadata"].value("config_digest", std::string{});
    }
    return m;
}

void save_mlp(const Mlp& net, const std::filesystem::path& path, const ContainerMeta& meta) {
    write_container(path, "mlp", meta, mlp_json(net));
}
Mlp load_mlp(const std::filesystem::path& path) { return read_container(path, "mlp", json_mlp); }

void save_pipeline(const ReductionPipeline<double>& p, const std::filesystem::path& path, const ContainerMeta& meta) {
    write_container(path, "pipeline", meta, pipeline_json(p));
}
ReductionPipeline<double> load_pipeline(const std::filesystem::path& path) {
    return read_container(path, "pipeline", json_pipeline);
}

void save_stage(const StageNet& s, const std::filesystem::path& path, const ContainerMeta& meta) {
    write_container(path, "stage", meta, stage_json(s));
}
StageNet load_stage(const std::filesystem::path& path) {
    return read_container(path, "stage", [](const json& j) {
        auto s = json_stage(j);
        if (s.pipeline.output_size() != s.net.input_size()) throw IntegrityError("stage pipeline does not fit its network");
        return s;
    });
}

void save_windows(const WindowsModule& m, const std::filesystem::path& path, const ContainerMeta& meta) {
    write_container(path, "windows", meta, windows_json(m));
}
WindowsModule load_windows(const std::filesystem::path& path) { return read_container(path, "windows", json_windows); }

void save_hierarchy(const HierarchyModel& m, const std::filesystem::path& path, const ContainerMeta& meta) {
    write_container(path, "hierarchy", meta, hierarchy_json(m));
}
HierarchyModel load_hierarchy(const std::filesystem::path& path) {
    return read_container(path, "hierarchy", json_hierarchy);
}

void save_dataset(const Dataset& d, const std::filesystem::path& path, const ContainerMeta& meta) {
    write_container(path, "dataset", meta, dataset_json(d));
}
Dataset load_dataset(const std::filesystem::path& path) { return read_container(path, "dataset", json_dataset); }

}  // namespace osfp
