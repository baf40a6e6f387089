#include <fstream>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "provider/chat.hpp"

namespace forge::provider {

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::file_for(const std::string& key) const {
    return *dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<Json> ResponseCache::get(const std::string& key) {
    {
        std::lock_guard lock(mu_);
        if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    }
    if (!dir_) return std::nullopt;
    const auto path = file_for(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    auto parsed = Json::parse(read_text_file(path), nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;  // torn or foreign file: treat as a miss
    std::lock_guard lock(mu_);
    memory_.emplace(key, parsed);
    return parsed;
}

void ResponseCache::put(const std::string& key, const Json& value) {
    if (dir_) write_file_atomic(file_for(key), canonical_dump(value));
    std::lock_guard lock(mu_);
    memory_[key] = value;
}

std::unique_lock<std::mutex> ResponseCache::lock_key(const std::string& key) {
    std::mutex* m = nullptr;
    {
        std::lock_guard lock(mu_);
        auto& slot = key_locks_[key];
        if (!slot) slot = std::make_unique<std::mutex>();
        m = slot.get();
    }
    return std::unique_lock<std::mutex>(*m);
}

std::string cache_key(std::string_view backend_name, const ChatRequest& req) {
    std::string material(backend_name);
    material += '\n';
    material += req.model_id;
    material += '\n';
    material += canonical_dump(to_json(req));
    return sha256_hex(material);
}

ChatClient::ChatClient(std::shared_ptr<ChatPort> backend, std::shared_ptr<ResponseCache> cache,
                       RetryPolicy policy, Sleeper sleeper)
    : backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      policy_(policy),
      sleep_(std::move(sleeper)) {}

ChatResponse ChatClient::chat(const ChatRequest& req) {
    validate(req);
    const std::string key = cache_key(backend_->name(), req);
    auto key_lock = cache_->lock_key(key);
    if (auto hit = cache_->get(key)) return response_from_json(*hit);

    ChatResponse resp = with_retries(policy_, sleep_, [&] {
        ++backend_calls_;
        return backend_->chat(req);
    });
    if (resp.content.empty()) resp.finish_reason = FinishReason::Refused;
    cache_->put(key, to_json(resp));
    return resp;
}

EmbedClient::EmbedClient(std::shared_ptr<EmbedPort> backend, std::shared_ptr<ResponseCache> cache,
                         RetryPolicy policy, ChatClient::Sleeper sleeper)
    : backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      policy_(policy),
      sleep_(std::move(sleeper)) {}

std::vector<EmbeddingVector> EmbedClient::embed(const std::vector<std::string>& texts) {
    for (std::size_t i = 0; i < texts.size(); ++i)
        require(!texts[i].empty(), Errc::EmptyText, "text at index " + std::to_string(i) + " is empty");

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> keys(texts.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        keys[i] = sha256_hex(backend_->name() + "\nembed\n" + texts[i]);
        if (auto hit = cache_->get(keys[i])) out[i].values = hit->get<std::vector<double>>();
        else misses.push_back(i);
    }
    if (misses.empty()) return out;

    std::vector<std::string> batch;
    batch.reserve(misses.size());
    for (auto i : misses) batch.push_back(texts[i]);
    auto fresh = with_retries(policy_, sleep_, [&] { return backend_->embed(batch); });
    require(fresh.size() == batch.size(), Errc::ProviderFailure,
            "backend returned " + std::to_string(fresh.size()) + " vectors for " + std::to_string(batch.size()) +
                " texts");
    for (std::size_t j = 0; j < misses.size(); ++j) {
        cache_->put(keys[misses[j]], Json(fresh[j].values));
        out[misses[j]] = std::move(fresh[j]);
    }
    return out;
}

}  // namespace forge::provider
