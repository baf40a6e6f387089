#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace forge {

using TomlValue = std::variant<std::string, std::int64_t, double, bool>;

// Flat view of a TOML document: `[backend]\nmodel = "x"` becomes
// {"backend.model": "x"}. Supports tables, dotted table headers, comments,
// basic strings with escapes, integers, floats and booleans. Arrays and
// inline tables are rejected.
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(std::string_view text);

}  // namespace forge
