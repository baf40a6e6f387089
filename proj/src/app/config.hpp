#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "common/json_io.hpp"

namespace forge::app {

struct BackendConfig {
    std::string chat_model = "gpt-4-turbo";
    std::string judge_model;  // empty: same as chat_model
    std::string embed_model = "text-embedding-3-small";
    std::int64_t embed_dim = 1536;
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "FORGE_API_KEY";
    std::int64_t timeout_s = 120;
    std::int64_t max_retries = 3;
    double synth_temperature = 0.7;
};

struct PipelineConfig {
    std::int64_t max_tokens = 500;
    std::int64_t pairs_per_opinion = 1;
    std::int64_t top_k = 1;
    std::int64_t mcq_count = 50;
    std::int64_t mcq_count_full = 500;
    std::int64_t sessions_per_fan_type = 10;
    std::int64_t rounds = 5;
    std::int64_t workers = 4;
    std::int64_t context_budget_tokens = 32000;
};

struct WorkspaceConfig {
    std::filesystem::path root;
    std::filesystem::path cache_dir;  // relative paths resolve against root
    std::uint64_t seed = 0;
    BackendConfig backend;
    PipelineConfig pipeline;
    std::vector<std::string> warnings;

    Json to_json() const;
    // SHA-256 of the canonical JSON, excluding root and warnings.
    std::string hash() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

// Reads `config_path` (default `<root>/forge.toml`, optional when defaulted),
// then applies FORGE_<SECTION>_<KEY> environment overrides, e.g.
// FORGE_PIPELINE_TOP_K=3 or FORGE_SEED=7. Unknown keys, wrong types and
// out-of-range values raise ConfigInvalid naming the field path.
WorkspaceConfig load_config(const std::filesystem::path& root,
                            const std::optional<std::filesystem::path>& config_path = std::nullopt,
                            const EnvLookup& env = process_env);

WorkspaceConfig parse_config_text(const std::string& toml_text, const std::filesystem::path& root,
                                  const EnvLookup& env = {});

}  // namespace forge::app
