#pragma once

// Deterministic in-process backends. They are the oracles for the unit and
// acceptance suites and back the `--mock` CLI mode.

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "provider/chat.hpp"

namespace forge::provider {

class CountingChat : public ChatPort {
public:
    ChatResponse chat(const ChatRequest& req) final {
        ++calls_;
        return respond(req);
    }
    std::uint64_t calls() const noexcept { return calls_; }

protected:
    virtual ChatResponse respond(const ChatRequest& req) = 0;

private:
    std::atomic<std::uint64_t> calls_{0};
};

/// Replies with the last user message verbatim.
class EchoChat final : public CountingChat {
public:
    std::string name() const override { return "mock-echo"; }

protected:
    ChatResponse respond(const ChatRequest& req) override;
};

/// Looks the last user message up in a table. With a sequence installed it
/// instead returns the queued replies in order, repeating the final one.
class ScriptedChat final : public CountingChat {
public:
    ScriptedChat() = default;
    explicit ScriptedChat(std::map<std::string, std::string> table) : table_(std::move(table)) {}

    static std::shared_ptr<ScriptedChat> sequence(std::vector<std::string> replies);

    void add(std::string prompt, std::string reply);
    std::string name() const override { return "mock-scripted"; }

protected:
    ChatResponse respond(const ChatRequest& req) override;

private:
    std::mutex mu_;
    std::map<std::string, std::string> table_;
    std::vector<std::string> sequence_;
    std::size_t next_ = 0;
};

/// Arbitrary reply function, for tests that need to inspect prompts.
class FunctionChat final : public CountingChat {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit FunctionChat(Fn fn, std::string name = "mock-function") : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string name() const override { return name_; }

protected:
    ChatResponse respond(const ChatRequest& req) override { return {fn_(req), FinishReason::Complete, {}}; }

private:
    Fn fn_;
    std::string name_;
};

/// Answers with one of the letters A-D, uniformly, keyed on (seed, request).
class RandomChoiceChat final : public CountingChat {
public:
    explicit RandomChoiceChat(std::uint64_t seed) : seed_(seed) {}
    std::string name() const override { return "mock-random-choice"; }

protected:
    ChatResponse respond(const ChatRequest& req) override;

private:
    std::uint64_t seed_;
};

/// Fails the first `failures` calls with `status`, then delegates.
class FlakyChat final : public CountingChat {
public:
    FlakyChat(std::shared_ptr<ChatPort> inner, int failures, int status = 503)
        : inner_(std::move(inner)), remaining_(failures), status_(status) {}
    std::string name() const override { return inner_->name(); }

protected:
    ChatResponse respond(const ChatRequest& req) override;

private:
    std::shared_ptr<ChatPort> inner_;
    std::atomic<int> remaining_;
    int status_;
};

/// Feature-hashing bag-of-tokens embedder, unit-normalized. Texts sharing
/// vocabulary land close together, so retrieval behaves sensibly offline.
class HashEmbedder final : public EmbedPort {
public:
    explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0) : dim_(dimension), seed_(seed) {}

    std::string name() const override { return "mock-hash-embed-" + std::to_string(dim_); }
    std::size_t dimension() const override { return dim_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

    EmbeddingVector embed_one(std::string_view text) const;
    std::uint64_t calls() const noexcept { return calls_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::atomic<std::uint64_t> calls_{0};
};

}  // namespace forge::provider
