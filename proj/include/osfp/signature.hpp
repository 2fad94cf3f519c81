#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace osfp {

/// The nine tests of the first-generation Nmap battery.
enum class TestId { T1, T2, T3, T4, T5, T6, T7, PU, TSeq };

inline constexpr std::array<TestId, 9> kAllTests = {
    TestId::T1, TestId::T2, TestId::T3, TestId::T4, TestId::T5,
    TestId::T6, TestId::T7, TestId::PU, TestId::TSeq};

std::string_view to_string(TestId id);
std::optional<TestId> parse_test_id(std::string_view text);

/// True when `field` belongs to the vocabulary of `test`.
bool is_known_field(TestId test, std::string_view field);
/// Fields whose values are hexadecimal integers (W, gcd, SI, ...).
bool is_hex_field(std::string_view field);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ParseWarning {
    std::size_t line = 0;
    std::string message;
};

// Constraint forms a signature rule may take.
struct Const {
    std::string value;
    bool operator==(const Const&) const = default;
};

struct OneOf {
    std::vector<std::string> values;
    bool operator==(const OneOf&) const = default;
};

struct Comparison {
    enum class Op { Less, Greater };
    Op op = Op::Less;
    std::uint64_t bound = 0;

    bool satisfied_by(std::uint64_t value) const {
        return op == Op::Less ? value < bound : value > bound;
    }
    bool operator==(const Comparison&) const = default;
};

struct AllOf {
    std::vector<Comparison> terms;
    bool operator==(const AllOf&) const = default;
};

/// Unknown field: kept verbatim, always satisfied.
struct Any {
    std::string raw;
    bool operator==(const Any&) const = default;
};

using Constraint = std::variant<Const, OneOf, Comparison, AllOf, Any>;

struct FieldConstraint {
    std::string field;
    Constraint constraint;
    bool operator==(const FieldConstraint&) const = default;
};

struct OsClass {
    std::string vendor;
    std::string family;
    std::string line;
    std::string purpose;
    bool operator==(const OsClass&) const = default;
};

struct Signature {
    std::string name;
    std::vector<OsClass> classes;
    std::map<TestId, std::vector<FieldConstraint>> tests;

    /// First Class line; labels are taken from it.
    const OsClass& primary_class() const;
    std::size_t rule_count() const;
    bool operator==(const Signature&) const = default;
};

/// Concrete responses of one host. A test may be missing entirely.
struct Observation {
    std::map<TestId, std::map<std::string, std::string>> tests;
    std::string source;
    bool operator==(const Observation&) const = default;
};

std::vector<Signature> parse_fingerprint_db(std::string_view text,
                                            std::vector<ParseWarning>* warnings = nullptr);
std::string serialize_signature(const Signature& sig);
std::string serialize_fingerprint_db(const std::vector<Signature>& db);

/// Parses one observation. Text may be a bare list of test lines or start
/// with an `Observation <name>` header.
Observation parse_observation(std::string_view text);
/// Parses every `Observation <name>` block of a file.
std::vector<Observation> parse_observations(std::string_view text);
std::string serialize_observation(const Observation& obs);

std::string serialize_constraint(const Constraint& c);
bool constraint_matches(const Constraint& c, std::string_view field, std::string_view value);

/// Matched rules over considered rules. Rules whose field the observation
/// lacks are not considered; no considered rule gives 0.
double match_score(const Signature& sig, const Observation& obs);

struct Match {
    std::size_t index = 0;  ///< position in the database
    double score = 0.0;
};

/// Descending by score, database order among ties.
std::vector<Match> best_fit(const std::vector<Signature>& db, const Observation& obs);

std::optional<std::uint64_t> parse_hex(std::string_view text);
std::string format_hex(std::uint64_t value);

}  // namespace osfp
