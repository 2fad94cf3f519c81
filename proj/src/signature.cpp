#include "osfp/signature.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace osfp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

bool starts_with_word(std::string_view line, std::string_view word) {
    return line.size() > word.size() && line.substr(0, word.size()) == word &&
           std::isspace(static_cast<unsigned char>(line[word.size()]));
}

std::string normalize_value(std::string_view field, std::string_view value) {
    std::string out(value);
    if (is_hex_field(field)) {
        for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

Comparison parse_comparison(std::string_view term, std::size_t line_no) {
    Comparison cmp;
    if (term.empty() || (term[0] != '<' && term[0] != '>'))
        throw ParseError(line_no, "expected '<' or '>' in comparison '" + std::string(term) + "'");
    cmp.op = term[0] == '<' ? Comparison::Op::Less : Comparison::Op::Greater;
    const auto bound = parse_hex(term.substr(1));
    if (!bound) throw ParseError(line_no, "bad numeric bound '" + std::string(term) + "'");
    cmp.bound = *bound;
    return cmp;
}

Constraint parse_constraint(std::string_view field, std::string_view value, std::size_t line_no) {
    const bool has_cmp = value.find_first_of("<>&") != std::string_view::npos;
    if (value.find('|') != std::string_view::npos) {
        if (has_cmp) throw ParseError(line_no, "comparison inside alternatives for field " + std::string(field));
        OneOf alts;
        for (auto part : split(value, '|')) {
            auto v = normalize_value(field, part);
            if (std::find(alts.values.begin(), alts.values.end(), v) == alts.values.end())
                alts.values.push_back(std::move(v));
        }
        return alts;
    }
    if (value.find('&') != std::string_view::npos) {
        AllOf all;
        for (auto part : split(value, '&')) all.terms.push_back(parse_comparison(part, line_no));
        return all;
    }
    if (has_cmp) return parse_comparison(value, line_no);
    return Const{normalize_value(field, value)};
}

struct TestLine {
    TestId id;
    std::vector<std::pair<std::string, std::string>> fields;
};

// `T1(DF=Y%W=16A0%...)`; returns nullopt when the line is not a test line.
std::optional<TestLine> parse_test_line(std::string_view line, std::size_t line_no) {
    const auto open = line.find('(');
    if (open == std::string_view::npos) return std::nullopt;
    const auto id = parse_test_id(trim(line.substr(0, open)));
    if (!id) return std::nullopt;

    int depth = 0;
    std::size_t close = std::string_view::npos;
    for (std::size_t i = open; i < line.size(); ++i) {
        if (line[i] == '(') ++depth;
        if (line[i] == ')') {
            if (--depth == 0) {
                close = i;
                break;
            }
        }
    }
    if (close == std::string_view::npos || depth != 0)
        throw ParseError(line_no, "unbalanced parentheses in " + std::string(to_string(*id)) + " line");
    if (!trim(line.substr(close + 1)).empty())
        throw ParseError(line_no, "trailing text after ')'");

    TestLine out{*id, {}};
    const auto body = line.substr(open + 1, close - open - 1);
    if (trim(body).empty()) return out;
    for (auto item : split(body, '%')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, "field without '=': '" + std::string(item) + "'");
        std::string name(trim(item.substr(0, eq)));
        if (name.empty()) throw ParseError(line_no, "empty field name");
        for (const auto& [existing, _] : out.fields)
            if (existing == name) throw ParseError(line_no, "duplicate field " + name);
        out.fields.emplace_back(std::move(name), std::string(trim(item.substr(eq + 1))));
    }
    return out;
}

bool has_constraint_syntax(std::string_view v) {
    return v.find_first_of("|<>&") != std::string_view::npos;
}

}  // namespace

std::string_view to_string(TestId id) {
    switch (id) {
        case TestId::T1: return "T1";
        case TestId::T2: return "T2";
        case TestId::T3: return "T3";
        case TestId::T4: return "T4";
        case TestId::T5: return "T5";
        case TestId::T6: return "T6";
        case TestId::T7: return "T7";
        case TestId::PU: return "PU";
        case TestId::TSeq: return "TSeq";
    }
    return "?";
}

std::optional<TestId> parse_test_id(std::string_view text) {
    for (auto id : kAllTests)
        if (to_string(id) == text) return id;
    return std::nullopt;
}

bool is_known_field(TestId test, std::string_view field) {
    static const std::set<std::string_view> tcp = {"Resp", "DF", "W", "ACK", "Flags", "Ops"};
    static const std::set<std::string_view> tseq = {"Resp", "Class", "gcd", "SI", "IPID", "TS", "VAL"};
    static const std::set<std::string_view> pu = {"Resp", "DF",  "TOS",  "IPLEN", "RIPTL",
                                                  "RID",  "RIPCK", "UCK", "ULEN",  "DAT"};
    switch (test) {
        case TestId::PU: return pu.contains(field);
        case TestId::TSeq: return tseq.contains(field);
        default: return tcp.contains(field);
    }
}

bool is_hex_field(std::string_view field) {
    static const std::set<std::string_view> hex = {"W", "gcd", "SI", "VAL", "TOS", "IPLEN", "RIPTL", "ULEN"};
    return hex.contains(field);
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

const OsClass& Signature::primary_class() const {
    static const OsClass none{};
    return classes.empty() ? none : classes.front();
}

std::size_t Signature::rule_count() const {
    return std::accumulate(tests.begin(), tests.end(), std::size_t{0},
                           [](std::size_t n, const auto& t) { return n + t.second.size(); });
}

std::optional<std::uint64_t> parse_hex(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string format_hex(std::uint64_t value) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%llX", static_cast<unsigned long long>(value));
    return buf;
}

std::vector<Signature> parse_fingerprint_db(std::string_view text, std::vector<ParseWarning>* warnings) {
    std::vector<Signature> db;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (starts_with_word(line, "Fingerprint")) {
            db.emplace_back();
            db.back().name = std::string(trim(line.substr(11)));
            continue;
        }
        if (starts_with_word(line, "Class")) {
            if (db.empty()) throw ParseError(line_no, "Class line before any Fingerprint line");
            auto parts = split(line.substr(5), '|');
            if (parts.size() != 4) throw ParseError(line_no, "Class line needs 4 '|'-separated fields");
            db.back().classes.push_back({std::string(trim(parts[0])), std::string(trim(parts[1])),
                                         std::string(trim(parts[2])), std::string(trim(parts[3]))});
            continue;
        }
        auto test = parse_test_line(line, line_no);
        if (!test) throw ParseError(line_no, "unrecognized line '" + std::string(line) + "'");
        if (db.empty()) throw ParseError(line_no, "test line before any Fingerprint line");

        auto& sig = db.back();
        if (sig.tests.contains(test->id))
            throw ParseError(line_no, "duplicate test " + std::string(to_string(test->id)));
        auto& rules = sig.tests[test->id];
        for (auto& [field, value] : test->fields) {
            if (!is_known_field(test->id, field)) {
                if (warnings)
                    warnings->push_back({line_no, "unknown field " + field + " in " +
                                                      std::string(to_string(test->id)) + " of '" + sig.name +
                                                      "'"});
                rules.push_back({field, Any{value}});
                continue;
            }
            rules.push_back({field, parse_constraint(field, value, line_no)});
        }
    }
    return db;
}

std::string serialize_constraint(const Constraint& c) {
    struct Visitor {
        std::string operator()(const Const& k) const { return k.value; }
        std::string operator()(const OneOf& o) const {
            std::string out;
            for (std::size_t i = 0; i < o.values.size(); ++i) out += (i ? "|" : "") + o.values[i];
            return out;
        }
        std::string operator()(const Comparison& cmp) const {
            return (cmp.op == Comparison::Op::Less ? "<" : ">") + format_hex(cmp.bound);
        }
        std::string operator()(const AllOf& all) const {
            std::string out;
            for (std::size_t i = 0; i < all.terms.size(); ++i) out += (i ? "&" : "") + (*this)(all.terms[i]);
            return out;
        }
        std::string operator()(const Any& a) const { return a.raw; }
    };
    return std::visit(Visitor{}, c);
}

std::string serialize_signature(const Signature& sig) {
    std::ostringstream out;
    out << "Fingerprint " << sig.name << '\n';
    for (const auto& c : sig.classes)
        out << "Class " << c.vendor << " | " << c.family << " | " << c.line << " | " << c.purpose << '\n';
    // Nmap files list TSeq first.
    auto emit = [&](TestId id) {
        const auto it = sig.tests.find(id);
        if (it == sig.tests.end()) return;
        out << to_string(id) << '(';
        for (std::size_t i = 0; i < it->second.size(); ++i)
            out << (i ? "%" : "") << it->second[i].field << '=' << serialize_constraint(it->second[i].constraint);
        out << ")\n";
    };
    emit(TestId::TSeq);
    for (auto id : kAllTests)
        if (id != TestId::TSeq) emit(id);
    return out.str();
}

std::string serialize_fingerprint_db(const std::vector<Signature>& db) {
    std::string out;
    for (const auto& sig : db) {
        out += serialize_signature(sig);
        out += '\n';
    }
    return out;
}

std::vector<Observation> parse_observations(std::string_view text) {
    std::vector<Observation> out;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (starts_with_word(line, "Observation") || line == "Observation") {
            out.emplace_back();
            out.back().source = std::string(trim(line.substr(11)));
            continue;
        }
        auto test = parse_test_line(line, line_no);
        if (!test) throw ParseError(line_no, "unrecognized line '" + std::string(line) + "'");
        if (out.empty()) out.emplace_back();
        auto& obs = out.back();
        if (obs.tests.contains(test->id))
            throw ParseError(line_no, "duplicate test " + std::string(to_string(test->id)));
        auto& fields = obs.tests[test->id];
        for (auto& [field, value] : test->fields) {
            if (has_constraint_syntax(value))
                throw ParseError(line_no, "constraint syntax in observation (" + field + "=" + value + ")");
            fields.emplace(field, normalize_value(field, value));
        }
    }
    return out;
}

Observation parse_observation(std::string_view text) {
    auto all = parse_observations(text);
    if (all.empty()) return {};
    return std::move(all.front());
}

std::string serialize_observation(const Observation& obs) {
    std::ostringstream out;
    if (!obs.source.empty()) out << "Observation " << obs.source << '\n';
    for (const auto& [id, fields] : obs.tests) {
        out << to_string(id) << '(';
        bool first = true;
        // Resp first so the line reads like Nmap output.
        if (auto it = fields.find("Resp"); it != fields.end()) {
            out << "Resp=" << it->second;
            first = false;
        }
        for (const auto& [field, value] : fields) {
            if (field == "Resp") continue;
            out << (first ? "" : "%") << field << '=' << value;
            first = false;
        }
        out << ")\n";
    }
    return out.str();
}

bool constraint_matches(const Constraint& c, std::string_view field, std::string_view value) {
    const auto normalized = normalize_value(field, value);
    struct Visitor {
        const std::string& v;
        bool operator()(const Const& k) const { return k.value == v; }
        bool operator()(const OneOf& o) const {
            return std::find(o.values.begin(), o.values.end(), v) != o.values.end();
        }
        bool operator()(const Comparison& cmp) const {
            const auto n = parse_hex(v);
            return n && cmp.satisfied_by(*n);
        }
        bool operator()(const AllOf& all) const {
            const auto n = parse_hex(v);
            return n && std::all_of(all.terms.begin(), all.terms.end(),
                                    [&](const Comparison& cmp) { return cmp.satisfied_by(*n); });
        }
        bool operator()(const Any&) const { return true; }
    };
    return std::visit(Visitor{normalized}, c);
}

double match_score(const Signature& sig, const Observation& obs) {
    std::size_t considered = 0;
    std::size_t matched = 0;
    for (const auto& [id, rules] : sig.tests) {
        const auto test = obs.tests.find(id);
        if (test == obs.tests.end()) continue;
        for (const auto& rule : rules) {
            const auto value = test->second.find(rule.field);
            if (value == test->second.end()) continue;
            ++considered;
            if (constraint_matches(rule.constraint, rule.field, value->second)) ++matched;
        }
    }
    return considered == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(considered);
}

std::vector<Match> best_fit(const std::vector<Signature>& db, const Observation& obs) {
    std::vector<Match> ranked;
    ranked.reserve(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) ranked.push_back({i, match_score(db[i], obs)});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Match& a, const Match& b) { return a.score > b.score; });
    return ranked;
}

}  // namespace osfp
