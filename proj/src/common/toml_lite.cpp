#include "common/toml_lite.hpp"

#include <charconv>
#include <sstream>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge {

namespace {

[[noreturn]] void bad(std::size_t lineno, const std::string& what) {
    fail(Errc::ConfigInvalid, "line " + std::to_string(lineno) + ": " + what);
}

std::string strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_string && c == '\\') {
            ++i;
            continue;
        }
        if (c == '"') in_string = !in_string;
        if (c == '#' && !in_string) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

std::string parse_basic_string(std::string_view raw, std::size_t lineno) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') bad(lineno, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (++i + 1 > raw.size() - 1) bad(lineno, "dangling escape");
        switch (raw[i]) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            default: bad(lineno, std::string("unsupported escape \\") + raw[i]);
        }
    }
    return out;
}

TomlValue parse_value(std::string_view raw, std::size_t lineno) {
    if (raw.empty()) bad(lineno, "missing value");
    if (raw.front() == '"') return parse_basic_string(raw, lineno);
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '[' || raw.front() == '{') bad(lineno, "arrays and inline tables are not supported");
    std::string digits;
    for (char c : raw)
        if (c != '_') digits.push_back(c);
    const char* first = digits.data();
    const char* last = first + digits.size();
    if (digits.find_first_of(".eE") == std::string::npos) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last) return v;
    } else {
        double v = 0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec == std::errc() && p == last) return v;
    }
    bad(lineno, "cannot parse value '" + std::string(raw) + "'");
}

}  // namespace

TomlTable parse_toml(std::string_view text) {
    TomlTable out;
    std::string prefix;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) bad(lineno, "malformed table header");
            prefix = trim(std::string_view(body).substr(1, body.size() - 2)) + ".";
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string::npos) bad(lineno, "expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) bad(lineno, "empty key");
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = parse_basic_string(key, lineno);
        std::string full = prefix + key;
        if (out.count(full)) bad(lineno, "duplicate key " + full);
        out.emplace(std::move(full), parse_value(trim(std::string_view(body).substr(eq + 1)), lineno));
    }
    return out;
}

}  // namespace forge
