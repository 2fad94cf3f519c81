#include "osfp/endpoint.hpp"

#include <cctype>
#include <sstream>

#include "osfp/signature.hpp"

namespace osfp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

// key="value" pairs of a listing line.
std::map<std::string, std::string> quoted_pairs(std::string_view line, std::size_t line_no) {
    std::map<std::string, std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const auto eq = line.find('=', i);
        if (eq == std::string_view::npos || eq + 1 >= line.size() || line[eq + 1] != '"')
            throw ParseError(line_no, "expected key=\"value\"");
        const auto close = line.find('"', eq + 2);
        if (close == std::string_view::npos) throw ParseError(line_no, "unterminated quote");
        out[std::string(line.substr(i, eq - i))] = std::string(line.substr(eq + 2, close - eq - 2));
        i = close + 1;
    }
    return out;
}

}  // namespace

std::size_t EndpointMap::binding_count() const {
    std::size_t n = 0;
    for (const auto& p : programs) n += p.bindings.size();
    return n;
}

bool is_uuid(std::string_view text) {
    static constexpr std::size_t groups[] = {8, 4, 4, 4, 12};
    std::size_t pos = 0;
    for (std::size_t g = 0; g < 5; ++g) {
        for (std::size_t i = 0; i < groups[g]; ++i, ++pos)
            if (pos >= text.size() || !std::isxdigit(static_cast<unsigned char>(text[pos]))) return false;
        if (g < 4) {
            if (pos >= text.size() || text[pos] != '-') return false;
            ++pos;
        }
    }
    return pos == text.size();
}

EndpointMap parse_endpoint_dump(std::string_view text) {
    EndpointMap map;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        auto add_program = [&](std::string_view uuid) {
            if (!is_uuid(uuid)) throw ParseError(line_no, "malformed UUID '" + std::string(uuid) + "'");
            map.programs.push_back({upper(uuid), std::nullopt, {}});
        };
        auto current = [&]() -> RpcProgram& {
            if (map.programs.empty()) throw ParseError(line_no, "binding before any uuid line");
            return map.programs.back();
        };

        if (line.find("=\"") != std::string_view::npos) {
            const auto kv = quoted_pairs(line, line_no);
            if (auto it = kv.find("uuid"); it != kv.end()) {
                add_program(it->second);
            } else if (auto a = kv.find("annotation"); a != kv.end()) {
                if (map.programs.empty()) throw ParseError(line_no, "annotation before any uuid line");
                map.programs.back().annotation = a->second;
            } else if (auto p = kv.find("protocol"); p != kv.end()) {
                Binding b{p->second, std::nullopt};
                if (auto e = kv.find("endpoint"); e != kv.end()) b.endpoint = e->second;
                current().bindings.push_back(std::move(b));
            } else {
                throw ParseError(line_no, "unrecognized listing line");
            }
            continue;
        }

        const auto space = line.find_first_of(" \t");
        const auto keyword = line.substr(0, space);
        const auto rest = space == std::string_view::npos ? std::string_view{} : trim(line.substr(space));
        if (keyword == "uuid") {
            add_program(rest);
        } else if (keyword == "annotation") {
            if (map.programs.empty()) throw ParseError(line_no, "annotation before any uuid line");
            map.programs.back().annotation = std::string(rest);
        } else if (keyword == "binding") {
            if (rest.empty()) throw ParseError(line_no, "binding without protocol");
            const auto sep = rest.find_first_of(" \t");
            Binding b{std::string(rest.substr(0, sep)), std::nullopt};
            if (sep != std::string_view::npos) b.endpoint = std::string(trim(rest.substr(sep)));
            current().bindings.push_back(std::move(b));
        } else {
            throw ParseError(line_no, "unrecognized dump line '" + std::string(line) + "'");
        }
    }
    for (const auto& p : map.programs)
        if (p.bindings.empty()) throw ParseError(line_no, "program " + p.uuid + " has no bindings");
    return map;
}

std::string serialize_endpoint_dump(const EndpointMap& map) {
    std::ostringstream out;
    for (const auto& p : map.programs) {
        out << "uuid " << p.uuid << '\n';
        if (p.annotation) out << "annotation " << *p.annotation << '\n';
        for (const auto& b : p.bindings) {
            out << "  binding " << b.protocol;
            if (b.endpoint) out << ' ' << *b.endpoint;
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace osfp
