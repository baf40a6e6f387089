#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/json_io.hpp"

namespace forge::provider {

enum class Role { System, User, Assistant };

std::string_view role_name(Role r) noexcept;
Role parse_role(std::string_view s);

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct ChatRequest {
    std::string model_id;
    std::vector<Message> messages;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::optional<int> max_output_tokens;
    // Free-form label naming the pipeline step that issued the request. Used
    // for logging and by the offline synthetic backend; not sent over HTTP.
    std::string task;
};

enum class FinishReason { Complete, Truncated, Refused };

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t output_tokens = 0;

    bool operator==(const Usage&) const = default;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::Complete;
    Usage usage;

    bool operator==(const ChatResponse&) const = default;
};

// Per-call-site model parameters; judging and grading use temperature 0.
struct ModelSettings {
    std::string model_id = "default";
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::optional<int> max_output_tokens;
};

ChatRequest make_request(const ModelSettings& settings, std::string task, std::vector<Message> messages);

// Throws Error(InvalidRequest) unless messages is non-empty and, after any
// leading system messages, roles alternate user/assistant starting with user.
void validate(const ChatRequest& req);

const std::string& last_user_content(const ChatRequest& req);

Json to_json(const ChatRequest& req);
Json to_json(const ChatResponse& resp);
ChatResponse response_from_json(const Json& j);

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

// Raised by backends. `status` is the HTTP status, or 0 for transport errors.
class BackendError : public std::runtime_error {
public:
    BackendError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const noexcept { return status_; }
    bool retryable() const noexcept {
        return status_ == 0 || status_ == 408 || status_ == 409 || status_ == 429 || status_ >= 500;
    }

private:
    int status_;
};

class ChatPort {
public:
    virtual ~ChatPort() = default;
    virtual std::string name() const = 0;
    virtual ChatResponse chat(const ChatRequest& req) = 0;
};

class EmbedPort {
public:
    virtual ~EmbedPort() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{500};
    double multiplier = 2.0;
    bool jitter = false;
    std::uint64_t jitter_seed = 0;
};

// Content-addressed response store: an in-memory map backed by one JSON file
// per key under `dir` (when set). Keys are SHA-256 hex digests.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

    std::optional<Json> get(const std::string& key);
    void put(const std::string& key, const Json& value);

    // Holding the returned lock serializes work on one key.
    std::unique_lock<std::mutex> lock_key(const std::string& key);

private:
    std::filesystem::path file_for(const std::string& key) const;

    std::optional<std::filesystem::path> dir_;
    std::mutex mu_;
    std::unordered_map<std::string, Json> memory_;
    std::unordered_map<std::string, std::unique_ptr<std::mutex>> key_locks_;
};

std::string cache_key(std::string_view backend_name, const ChatRequest& req);

// The ChatPort every pipeline stage talks to: validates, consults the cache,
// and calls the backend with bounded exponential-backoff retries on a miss.
class ChatClient final : public ChatPort {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    ChatClient(std::shared_ptr<ChatPort> backend, std::shared_ptr<ResponseCache> cache,
               RetryPolicy policy = {}, Sleeper sleeper = {});

    std::string name() const override { return backend_->name(); }
    ChatResponse chat(const ChatRequest& req) override;

    std::uint64_t backend_calls() const noexcept { return backend_calls_; }

private:
    std::shared_ptr<ChatPort> backend_;
    std::shared_ptr<ResponseCache> cache_;
    RetryPolicy policy_;
    Sleeper sleep_;
    std::atomic<std::uint64_t> backend_calls_{0};
};

// Validating, caching, retrying wrapper for embedding backends.
class EmbedClient final : public EmbedPort {
public:
    EmbedClient(std::shared_ptr<EmbedPort> backend, std::shared_ptr<ResponseCache> cache,
                RetryPolicy policy = {}, ChatClient::Sleeper sleeper = {});

    std::string name() const override { return backend_->name(); }
    std::size_t dimension() const override { return backend_->dimension(); }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    std::shared_ptr<EmbedPort> backend_;
    std::shared_ptr<ResponseCache> cache_;
    RetryPolicy policy_;
    ChatClient::Sleeper sleep_;
};

// Shared retry loop. `attempt` performs one backend call.
template <class Fn>
auto with_retries(const RetryPolicy& policy, const ChatClient::Sleeper& sleep, Fn&& attempt)
    -> decltype(attempt());

}  // namespace forge::provider

#include "provider/retry_impl.hpp"
