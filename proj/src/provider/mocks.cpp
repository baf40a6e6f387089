#include "provider/mocks.hpp"

#include <cctype>
#include <cmath>

#include "common/digest.hpp"

namespace forge::provider {

ChatResponse EchoChat::respond(const ChatRequest& req) {
    return {last_user_content(req), FinishReason::Complete, {}};
}

std::shared_ptr<ScriptedChat> ScriptedChat::sequence(std::vector<std::string> replies) {
    auto s = std::make_shared<ScriptedChat>();
    s->sequence_ = std::move(replies);
    return s;
}

void ScriptedChat::add(std::string prompt, std::string reply) {
    std::lock_guard lock(mu_);
    table_[std::move(prompt)] = std::move(reply);
}

ChatResponse ScriptedChat::respond(const ChatRequest& req) {
    std::lock_guard lock(mu_);
    if (!sequence_.empty()) {
        const auto& reply = sequence_[std::min(next_, sequence_.size() - 1)];
        ++next_;
        return {reply, FinishReason::Complete, {}};
    }
    auto it = table_.find(last_user_content(req));
    if (it == table_.end()) throw BackendError(400, "scripted mock has no reply for this prompt");
    return {it->second, FinishReason::Complete, {}};
}

ChatResponse RandomChoiceChat::respond(const ChatRequest& req) {
    const auto h = stable_hash(canonical_dump(to_json(req)), seed_);
    const char letter = static_cast<char>('A' + h % 4);
    return {std::string(1, letter), FinishReason::Complete, {}};
}

ChatResponse FlakyChat::respond(const ChatRequest& req) {
    if (remaining_.fetch_sub(1) > 0) throw BackendError(status_, "injected failure");
    return inner_->chat(req);
}

EmbeddingVector HashEmbedder::embed_one(std::string_view text) const {
    EmbeddingVector v;
    v.values.assign(dim_, 0.0);
    auto add_feature = [&](std::string_view feature) {
        const auto h = stable_hash(feature, seed_);
        const std::size_t slot = h % dim_;
        const double sign = (h >> 63) ? -1.0 : 1.0;
        v.values[slot] += sign;
    };
    // Lower-cased alphanumeric runs; any other non-space byte stands alone.
    std::string token;
    bool any = false;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            token.push_back(static_cast<char>(std::tolower(c)));
            continue;
        }
        if (!token.empty()) {
            add_feature(token);
            any = true;
            token.clear();
        }
        if (!std::isspace(c)) {
            add_feature(std::string(1, static_cast<char>(c)));
            any = true;
        }
    }
    if (!token.empty()) {
        add_feature(token);
        any = true;
    }
    double norm = 0;
    for (double x : v.values) norm += x * x;
    if (!any || norm == 0.0) {
        // Whitespace-only text, or features that cancelled out: fall back to a
        // pseudo-random direction derived from the raw bytes.
        std::uint64_t state = stable_hash(text, seed_ ^ 0x5eedULL);
        for (auto& x : v.values) {
            state = mix64(state);
            x = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
        }
        norm = 0;
        for (double x : v.values) norm += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& x : v.values) x *= inv;
    return v;
}

std::vector<EmbeddingVector> HashEmbedder::embed(const std::vector<std::string>& texts) {
    ++calls_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

}  // namespace forge::provider
