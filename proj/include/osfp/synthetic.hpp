#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "osfp/signature.hpp"

namespace osfp {

/// Generator of a first-generation signature database with the structure of
/// the public one: families share most of their responses, version groups
/// differ in a handful of fields, and individual signatures differ in window
/// sizes, sequence ranges and the odd extra field.
struct SyntheticDbOptions {
    std::uint64_t seed = 2005;
    /// Multiplies the number of signatures per version group (at least 1).
    double density = 1.0;
    bool irrelevant = true;
    /// Adds a few signatures that constrain only two or three tests.
    bool sparse = true;
};

std::string synthetic_fingerprint_text(const SyntheticDbOptions& options = {});
std::vector<Signature> synthetic_fingerprint_db(const SyntheticDbOptions& options = {});

/// Signatures whose primary class belongs to `family`, in database order.
std::vector<Signature> family_slice(const std::vector<Signature>& db, std::string_view family);

/// At most `per_family` signatures of each listed family, in database order.
std::vector<Signature> take_per_family(const std::vector<Signature>& db, const std::vector<std::string>& families,
                                       std::size_t per_family);

}  // namespace osfp
