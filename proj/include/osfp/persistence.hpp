#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "osfp/datagen.hpp"
#include "osfp/dcerpc.hpp"
#include "osfp/hierarchy.hpp"
#include "osfp/mlp.hpp"
#include "osfp/preprocess.hpp"

namespace osfp {

/// Files are JSON objects
///
///     {"format_version": 1, "kind": "...", "metadata": {"seed": .., "config_digest": ".."},
///      "digest": "<FNV-1a 64 of body>", "body": {...}}
///
/// Numbers are written in shortest round-trip form, so doubles load back
/// bit-identical.
inline constexpr int kFormatVersion = 1;

class PersistenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
/// Unreadable file, malformed container or body that fails its digest.
class IntegrityError : public PersistenceError {
public:
    using PersistenceError::PersistenceError;
};
class VersionError : public PersistenceError {
public:
    using PersistenceError::PersistenceError;
};
class KindError : public PersistenceError {
public:
    using PersistenceError::PersistenceError;
};

struct ContainerMeta {
    std::uint64_t seed = 0;
    std::string config_digest;
};

/// 16 lower-case hex digits.
std::string fnv1a_hex(std::string_view data);

/// Kind tag of a container file ("mlp", "pipeline", "stage", "hierarchy",
/// "windows", "dataset"); checks version and digest.
std::string container_kind(const std::filesystem::path& path);
ContainerMeta container_meta(const std::filesystem::path& path);

void save_mlp(const Mlp& net, const std::filesystem::path& path, const ContainerMeta& meta = {});
Mlp load_mlp(const std::filesystem::path& path);

void save_pipeline(const ReductionPipeline<double>& p, const std::filesystem::path& path, const ContainerMeta& meta = {});
ReductionPipeline<double> load_pipeline(const std::filesystem::path& path);

void save_stage(const StageNet& s, const std::filesystem::path& path, const ContainerMeta& meta = {});
StageNet load_stage(const std::filesystem::path& path);

void save_windows(const WindowsModule& m, const std::filesystem::path& path, const ContainerMeta& meta = {});
WindowsModule load_windows(const std::filesystem::path& path);

void save_hierarchy(const HierarchyModel& m, const std::filesystem::path& path, const ContainerMeta& meta = {});
HierarchyModel load_hierarchy(const std::filesystem::path& path);

void save_dataset(const Dataset& d, const std::filesystem::path& path, const ContainerMeta& meta = {});
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace osfp
