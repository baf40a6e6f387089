#include "provider/http_backend.hpp"

#include <httplib.h>

#include "common/errors.hpp"

namespace forge::provider {

std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

namespace {

Json post_json(const HttpEndpoint& ep, const std::string& route, const Json& body) {
    auto [origin, prefix] = split_base_url(ep.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(ep.timeout);
    client.set_read_timeout(ep.timeout);
    client.set_write_timeout(ep.timeout);
    httplib::Headers headers;
    if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);
    auto res = client.Post(prefix + route, headers, body.dump(), "application/json");
    if (!res) throw BackendError(0, "transport error: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw BackendError(res->status, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    auto parsed = Json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw BackendError(502, "backend returned non-JSON body");
    return parsed;
}

}  // namespace

ChatResponse HttpChatBackend::chat(const ChatRequest& req) {
    const Json reply = post_json(endpoint_, "/chat/completions", to_json(req));
    try {
        const auto& choice = reply.at("choices").at(0);
        ChatResponse out;
        const auto& content = choice.at("message").at("content");
        out.content = content.is_null() ? std::string() : content.get<std::string>();
        const auto finish = choice.value("finish_reason", std::string("stop"));
        if (finish == "length") out.finish_reason = FinishReason::Truncated;
        else if (finish == "content_filter" || out.content.empty()) out.finish_reason = FinishReason::Refused;
        if (reply.contains("usage")) {
            out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
            out.usage.output_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
        }
        return out;
    } catch (const Json::exception& e) {
        throw BackendError(502, std::string("unexpected chat response shape: ") + e.what());
    }
}

std::vector<EmbeddingVector> HttpEmbedBackend::embed(const std::vector<std::string>& texts) {
    const Json reply = post_json(endpoint_, "/embeddings", Json{{"model", model_}, {"input", texts}});
    try {
        const auto& data = reply.at("data");
        std::vector<EmbeddingVector> out(texts.size());
        std::vector<bool> seen(texts.size(), false);
        for (const auto& row : data) {
            const auto idx = row.value("index", std::size_t{0});
            if (idx >= out.size() || seen[idx]) throw BackendError(502, "bad embedding index");
            out[idx].values = row.at("embedding").get<std::vector<double>>();
            seen[idx] = true;
        }
        for (bool s : seen)
            if (!s) throw BackendError(502, "missing embedding rows");
        return out;
    } catch (const Json::exception& e) {
        throw BackendError(502, std::string("unexpected embedding response shape: ") + e.what());
    }
}

}  // namespace forge::provider
