#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge {

std::string trim(std::string_view s);

// CRLF and lone CR become LF. This is the only normalization applied to
// transcript text before chunking.
std::string normalize_newlines(std::string_view s);

// Collapses every run of ASCII whitespace to one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

// Substring test that tolerates whitespace drift on either side.
bool contains_normalized(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

std::string to_lower_ascii(std::string_view s);

}  // namespace forge
