#include "persona/agent.hpp"

#include <chrono>
#include <cstdio>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::persona {

using provider::Role;

std::string_view mode_name(ServeMode m) noexcept {
    switch (m) {
        case ServeMode::ProfileOnly: return "profile_only";
        case ServeMode::ProfileRag: return "profile_rag";
        case ServeMode::LongContext: return "long_context";
    }
    return "profile_only";
}

ServeMode parse_mode(std::string_view s) {
    if (s == "profile_only") return ServeMode::ProfileOnly;
    if (s == "profile_rag") return ServeMode::ProfileRag;
    if (s == "long_context") return ServeMode::LongContext;
    fail(Errc::Usage, "unknown mode '" + std::string(s) + "' (expected profile_only, profile_rag or long_context)");
}

Json ChatSession::to_json() const {
    Json hist = Json::array();
    for (const auto& m : history) hist.push_back({{"role", provider::role_name(m.role)}, {"content", m.content}});
    return {{"session_id", session_id}, {"persona_id", persona_id}, {"mode", mode_name(mode)},
            {"history", std::move(hist)}, {"created_at", created_at}};
}

namespace {

std::string fill(std::string text, const std::map<std::string, std::string>& slots) {
    for (const auto& [key, value] : slots) {
        const std::string token = "{" + key + "}";
        for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
            text.replace(pos, token.size(), value);
    }
    return text;
}

}  // namespace

PersonaAgent::PersonaAgent(corpus::PersonaRecord persona, AgentConfig config, std::shared_ptr<provider::ChatPort> chat,
                           std::shared_ptr<provider::EmbedPort> embedder,
                           std::shared_ptr<const retrieval::KnowledgeIndex> index, std::string full_corpus,
                           std::shared_ptr<const retrieval::TokenizerPort> tokenizer)
    : persona_(std::move(persona)),
      config_(std::move(config)),
      chat_(std::move(chat)),
      embedder_(std::move(embedder)),
      index_(std::move(index)),
      full_corpus_(std::move(full_corpus)),
      tokenizer_(tokenizer ? std::move(tokenizer) : std::make_shared<retrieval::DefaultTokenizer>()) {
    require(chat_ != nullptr, Errc::InvalidRequest, "persona agent needs a chat backend");
    require(!trim(persona_.profile_text).empty(), Errc::MalformedRecord, "persona profile is empty");
}

void PersonaAgent::check_mode(ServeMode mode) const {
    if (mode == ServeMode::ProfileRag) {
        require(index_ != nullptr && embedder_ != nullptr, Errc::MissingIndex,
                "no knowledge index loaded for persona '" + persona_.persona_id + "'");
    } else if (mode == ServeMode::LongContext) {
        require(!full_corpus_.empty(), Errc::MissingUpstreamArtifact,
                "long_context needs the cleaned corpus for '" + persona_.persona_id + "'");
        const auto needed = tokenizer_->count(full_corpus_) + tokenizer_->count(persona_.profile_text);
        require(needed <= config_.context_budget_tokens, Errc::ContextBudgetExceeded,
                "corpus needs " + std::to_string(needed) + " tokens, budget is " +
                    std::to_string(config_.context_budget_tokens));
    }
}

AssembledPrompt PersonaAgent::assemble_prompt(const ChatSession& session, const std::string& user_msg) const {
    AssembledPrompt out;
    out.system_block = fill(config_.prompt.system, {{"display_name", persona_.display_name},
                                                    {"field_tag", persona_.field_tag},
                                                    {"profile", persona_.profile_text},
                                                    {"style", config_.prompt.style}});
    switch (session.mode) {
        case ServeMode::ProfileOnly:
            break;
        case ServeMode::ProfileRag: {
            check_mode(ServeMode::ProfileRag);
            const auto hits = retrieval::search(*index_, user_msg, config_.top_k, *embedder_);
            std::vector<std::string> texts;
            for (const auto& h : hits) texts.push_back(h.chunk.text);
            out.context_block = join(texts, "\n\n");
            break;
        }
        case ServeMode::LongContext:
            check_mode(ServeMode::LongContext);
            out.context_block = full_corpus_;
            break;
    }
    out.messages = session.history;
    out.messages.push_back({Role::User, user_msg});
    return out;
}

provider::ChatRequest PersonaAgent::render(const AssembledPrompt& prompt, std::string task) const {
    std::string system = prompt.system_block;
    if (prompt.context_block) system += "\n\n" + config_.prompt.context_header + "\n" + *prompt.context_block;
    std::vector<Message> messages{{Role::System, std::move(system)}};
    messages.insert(messages.end(), prompt.messages.begin(), prompt.messages.end());
    return provider::make_request(config_.model, std::move(task), std::move(messages));
}

std::string PersonaAgent::respond(ChatSession& session, const std::string& user_msg, std::string task) const {
    require(!trim(user_msg).empty(), Errc::EmptyMessage, "message is empty");
    const auto prompt = assemble_prompt(session, user_msg);
    const auto resp = chat_->chat(render(prompt, std::move(task)));
    session.history.push_back({Role::User, user_msg});
    session.history.push_back({Role::Assistant, resp.content});
    return resp.content;
}

ChatSession PersonaAgent::new_session(std::string session_id, ServeMode mode) const {
    check_mode(mode);
    ChatSession s;
    s.session_id = std::move(session_id);
    s.persona_id = persona_.persona_id;
    s.mode = mode;
    s.created_at = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
    return s;
}

SessionStore::SessionStore(std::map<std::string, std::shared_ptr<const PersonaAgent>> agents)
    : agents_(std::move(agents)) {}

const PersonaAgent* SessionStore::agent(const std::string& persona_id) const {
    auto it = agents_.find(persona_id);
    return it == agents_.end() ? nullptr : it->second.get();
}

std::string SessionStore::create(const std::string& persona_id, ServeMode mode) {
    const auto* a = agent(persona_id);
    require(a != nullptr, Errc::NotFound, "unknown persona '" + persona_id + "'");
    std::lock_guard lock(mu_);
    char id[32];
    std::snprintf(id, sizeof id, "sess-%06llu", static_cast<unsigned long long>(next_id_++));
    auto entry = std::make_shared<Entry>();
    entry->session = a->new_session(id, mode);
    sessions_.emplace(id, entry);
    return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& session_id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    require(it != sessions_.end(), Errc::NotFound, "unknown session '" + session_id + "'");
    return it->second;
}

ChatSession SessionStore::get(const std::string& session_id) const {
    auto entry = find(session_id);
    std::lock_guard lock(entry->data);
    return entry->session;
}

std::string SessionStore::send(const std::string& session_id, const std::string& content) {
    auto entry = find(session_id);
    std::unique_lock turn(entry->turn, std::try_to_lock);
    require(turn.owns_lock(), Errc::Busy, "session '" + session_id + "' is already handling a message");
    ChatSession working;
    {
        std::lock_guard lock(entry->data);
        working = entry->session;
    }
    const auto* a = agent(working.persona_id);
    auto reply = a->respond(working, content);
    std::lock_guard lock(entry->data);
    entry->session = std::move(working);
    return reply;
}

void LocalPersonaEndpoint::open() {
    require(agent_ != nullptr, Errc::ServiceUnreachable, "no persona agent available");
    session_ = agent_->new_session(session_id_, mode_);
}

std::string LocalPersonaEndpoint::reply(const std::string& fan_message) {
    require(session_.has_value(), Errc::ServiceUnreachable, "endpoint not opened");
    return agent_->respond(*session_, fan_message);
}

}  // namespace forge::persona
