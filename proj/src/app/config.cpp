#include "app/config.hpp"

#include <cstdlib>
#include <map>
#include <variant>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "common/text.hpp"
#include "common/toml_lite.hpp"

namespace forge::app {

namespace {

struct IntField {
    std::int64_t* target;
    std::int64_t lo, hi;
};
struct DoubleField {
    double* target;
    double lo, hi;
};
using StringField = std::string*;
using Field = std::variant<IntField, DoubleField, StringField>;

std::map<std::string, Field> fields(WorkspaceConfig& c, std::int64_t* seed, std::string* cache_dir) {
    auto& b = c.backend;
    auto& p = c.pipeline;
    return {
        {"seed", IntField{seed, 0, INT64_MAX}},
        {"cache_dir", cache_dir},
        {"backend.chat_model", &b.chat_model},
        {"backend.judge_model", &b.judge_model},
        {"backend.embed_model", &b.embed_model},
        {"backend.embed_dim", IntField{&b.embed_dim, 1, 65536}},
        {"backend.base_url", &b.base_url},
        {"backend.api_key_env", &b.api_key_env},
        {"backend.timeout_s", IntField{&b.timeout_s, 1, 3600}},
        {"backend.max_retries", IntField{&b.max_retries, 0, 10}},
        {"backend.synth_temperature", DoubleField{&b.synth_temperature, 0.0, 2.0}},
        {"pipeline.max_tokens", IntField{&p.max_tokens, 16, 8192}},
        {"pipeline.pairs_per_opinion", IntField{&p.pairs_per_opinion, 1, 20}},
        {"pipeline.top_k", IntField{&p.top_k, 1, 50}},
        {"pipeline.mcq_count", IntField{&p.mcq_count, 1, 100000}},
        {"pipeline.mcq_count_full", IntField{&p.mcq_count_full, 1, 100000}},
        {"pipeline.sessions_per_fan_type", IntField{&p.sessions_per_fan_type, 1, 10000}},
        {"pipeline.rounds", IntField{&p.rounds, 1, 50}},
        {"pipeline.workers", IntField{&p.workers, 1, 256}},
        {"pipeline.context_budget_tokens", IntField{&p.context_budget_tokens, 256, 10000000}},
    };
}

std::string env_name(const std::string& path) {
    std::string out = "FORGE_";
    for (char c : path) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void assign(const std::string& path, Field& field, const TomlValue& value) {
    std::visit(
        [&](auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, IntField>) {
                const auto* v = std::get_if<std::int64_t>(&value);
                require(v != nullptr, Errc::ConfigInvalid, path + ": expected an integer");
                require(*v >= f.lo && *v <= f.hi, Errc::ConfigInvalid,
                        path + ": " + std::to_string(*v) + " is outside [" + std::to_string(f.lo) + ", " +
                            std::to_string(f.hi) + "]");
                *f.target = *v;
            } else if constexpr (std::is_same_v<F, DoubleField>) {
                double d = 0;
                if (const auto* i = std::get_if<std::int64_t>(&value)) d = static_cast<double>(*i);
                else if (const auto* x = std::get_if<double>(&value)) d = *x;
                else fail(Errc::ConfigInvalid, path + ": expected a number");
                require(d >= f.lo && d <= f.hi, Errc::ConfigInvalid, path + ": value is out of range");
                *f.target = d;
            } else {
                const auto* s = std::get_if<std::string>(&value);
                require(s != nullptr, Errc::ConfigInvalid, path + ": expected a string");
                *f = *s;
            }
        },
        field);
}

// Environment values arrive as text; read them with the field's own type.
TomlValue env_value(const std::string& path, const Field& field, const std::string& raw) {
    if (std::holds_alternative<StringField>(field)) return raw;
    try {
        return parse_toml("v = " + raw).at("v");
    } catch (const Error&) {
        fail(Errc::ConfigInvalid, path + ": cannot parse environment value '" + raw + "'");
    }
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

WorkspaceConfig parse_config_text(const std::string& toml_text, const std::filesystem::path& root,
                                  const EnvLookup& env) {
    WorkspaceConfig c;
    c.root = root;
    std::int64_t seed = 0;
    std::string cache_dir = ".cache";
    auto table = fields(c, &seed, &cache_dir);

    for (const auto& [key, value] : parse_toml(toml_text)) {
        auto it = table.find(key);
        require(it != table.end(), Errc::ConfigInvalid, key + ": unknown setting");
        assign(key, it->second, value);
    }
    if (env) {
        for (auto& [path, field] : table) {
            if (auto raw = env(env_name(path))) assign(path, field, env_value(path, field, *raw));
        }
    }
    require(!trim(c.backend.chat_model).empty(), Errc::ConfigInvalid, "backend.chat_model: must not be empty");
    require(!trim(c.backend.base_url).empty(), Errc::ConfigInvalid, "backend.base_url: must not be empty");
    if (c.pipeline.rounds != 5)
        c.warnings.push_back("pipeline.rounds overridden to " + std::to_string(c.pipeline.rounds) +
                             "; the evaluation protocol uses 5 rounds");
    c.seed = static_cast<std::uint64_t>(seed);
    c.cache_dir = std::filesystem::path(cache_dir).is_absolute() ? std::filesystem::path(cache_dir) : root / cache_dir;
    return c;
}

WorkspaceConfig load_config(const std::filesystem::path& root, const std::optional<std::filesystem::path>& config_path,
                            const EnvLookup& env) {
    const auto path = config_path.value_or(root / "forge.toml");
    std::string text;
    if (std::filesystem::exists(path)) {
        text = read_text_file(path);
    } else if (config_path) {
        fail(Errc::ConfigInvalid, "config file not found: " + path.string());
    }
    return parse_config_text(text, root, env);
}

Json WorkspaceConfig::to_json() const {
    const auto& b = backend;
    const auto& p = pipeline;
    return {{"seed", seed},
            {"cache_dir", cache_dir.lexically_relative(root).string()},
            {"backend",
             {{"chat_model", b.chat_model}, {"judge_model", b.judge_model}, {"embed_model", b.embed_model},
              {"embed_dim", b.embed_dim}, {"base_url", b.base_url}, {"api_key_env", b.api_key_env},
              {"timeout_s", b.timeout_s}, {"max_retries", b.max_retries},
              {"synth_temperature", b.synth_temperature}}},
            {"pipeline",
             {{"max_tokens", p.max_tokens}, {"pairs_per_opinion", p.pairs_per_opinion}, {"top_k", p.top_k},
              {"mcq_count", p.mcq_count}, {"mcq_count_full", p.mcq_count_full},
              {"sessions_per_fan_type", p.sessions_per_fan_type}, {"rounds", p.rounds}, {"workers", p.workers},
              {"context_budget_tokens", p.context_budget_tokens}}}};
}

std::string WorkspaceConfig::hash() const { return sha256_hex(canonical_dump(to_json())); }

}  // namespace forge::app
