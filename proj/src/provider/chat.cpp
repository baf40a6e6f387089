#include "provider/chat.hpp"

#include "common/errors.hpp"

namespace forge::provider {

std::string_view role_name(Role r) noexcept {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    fail(Errc::MalformedRecord, "unknown role '" + std::string(s) + "'");
}

ChatRequest make_request(const ModelSettings& settings, std::string task, std::vector<Message> messages) {
    ChatRequest req;
    req.model_id = settings.model_id;
    req.temperature = settings.temperature;
    req.seed = settings.seed;
    req.max_output_tokens = settings.max_output_tokens;
    req.task = std::move(task);
    req.messages = std::move(messages);
    return req;
}

void validate(const ChatRequest& req) {
    require(!req.messages.empty(), Errc::InvalidRequest, "messages must not be empty");
    require(req.temperature >= 0.0, Errc::InvalidRequest, "temperature must be >= 0");
    std::size_t i = 0;
    while (i < req.messages.size() && req.messages[i].role == Role::System) ++i;
    Role expected = Role::User;
    for (; i < req.messages.size(); ++i) {
        require(req.messages[i].role == expected, Errc::InvalidRequest,
                "message " + std::to_string(i) + " should have role " + std::string(role_name(expected)));
        expected = expected == Role::User ? Role::Assistant : Role::User;
    }
}

const std::string& last_user_content(const ChatRequest& req) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it)
        if (it->role == Role::User) return it->content;
    static const std::string kEmpty;
    return kEmpty;
}

Json to_json(const ChatRequest& req) {
    Json msgs = Json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    Json j{{"model", req.model_id}, {"messages", std::move(msgs)}, {"temperature", req.temperature}};
    if (req.seed) j["seed"] = *req.seed;
    if (req.max_output_tokens) j["max_tokens"] = *req.max_output_tokens;
    return j;
}

namespace {
std::string_view finish_name(FinishReason f) {
    switch (f) {
        case FinishReason::Complete: return "complete";
        case FinishReason::Truncated: return "truncated";
        case FinishReason::Refused: return "refused";
    }
    return "complete";
}
}  // namespace

Json to_json(const ChatResponse& resp) {
    return {{"content", resp.content},
            {"finish_reason", finish_name(resp.finish_reason)},
            {"usage", {{"prompt_tokens", resp.usage.prompt_tokens}, {"output_tokens", resp.usage.output_tokens}}}};
}

ChatResponse response_from_json(const Json& j) {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    const auto fr = j.value("finish_reason", std::string("complete"));
    r.finish_reason = fr == "truncated" ? FinishReason::Truncated
                      : fr == "refused" ? FinishReason::Refused
                                        : FinishReason::Complete;
    if (j.contains("usage")) {
        r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        r.usage.output_tokens = j["usage"].value("output_tokens", std::int64_t{0});
    }
    return r;
}

}  // namespace forge::provider
