#pragma once

#include <chrono>
#include <string>

#include "provider/chat.hpp"

namespace forge::provider {

struct HttpEndpoint {
    std::string base_url;  // e.g. "https://api.example.com/v1"
    std::string api_key;   // sent as a Bearer token when non-empty
    std::chrono::seconds timeout{120};
};

// Chat backend speaking the common `POST {base}/chat/completions` JSON shape.
class HttpChatBackend final : public ChatPort {
public:
    explicit HttpChatBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string name() const override { return "http:" + endpoint_.base_url; }
    ChatResponse chat(const ChatRequest& req) override;

private:
    HttpEndpoint endpoint_;
};

// Embedding backend for `POST {base}/embeddings`.
class HttpEmbedBackend final : public EmbedPort {
public:
    HttpEmbedBackend(HttpEndpoint endpoint, std::string model, std::size_t dimension)
        : endpoint_(std::move(endpoint)), model_(std::move(model)), dim_(dimension) {}
    std::string name() const override { return "http:" + endpoint_.base_url + "#" + model_; }
    std::size_t dimension() const override { return dim_; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    HttpEndpoint endpoint_;
    std::string model_;
    std::size_t dim_;
};

// Splits "scheme://host:port/prefix" into ("scheme://host:port", "/prefix").
std::pair<std::string, std::string> split_base_url(const std::string& url);

}  // namespace forge::provider
