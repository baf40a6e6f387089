#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge {

using Json = nlohmann::json;

struct JsonlRow {
    std::size_t line = 0;  // 1-based
    Json value;
};

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`, so readers never
// observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Parses one JSON value per non-blank line. A bad line raises
// Error(MalformedRecord) carrying its 1-based line number.
std::vector<JsonlRow> read_jsonl(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<Json>& rows);

// Sorted keys, no whitespace: two equal values always dump to the same bytes.
inline std::string canonical_dump(const Json& j) { return j.dump(); }

// Finds the first balanced JSON object or array embedded in free text (models
// like to wrap JSON in prose or code fences) and parses it.
std::optional<Json> extract_json(std::string_view text);

}  // namespace forge
