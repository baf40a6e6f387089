#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "corpus/corpus.hpp"
#include "provider/chat.hpp"
#include "retrieval/index.hpp"

namespace forge::persona {

using provider::Message;

enum class ServeMode { ProfileOnly, ProfileRag, LongContext };

std::string_view mode_name(ServeMode m) noexcept;
ServeMode parse_mode(std::string_view s);

struct ChatSession {
    std::string session_id;
    std::string persona_id;
    ServeMode mode = ServeMode::ProfileOnly;
    std::vector<Message> history;
    std::int64_t created_at = 0;  // unix milliseconds

    Json to_json() const;
};

struct AssembledPrompt {
    std::string system_block;                  // profile plus role instructions
    std::optional<std::string> context_block;  // retrieved chunk(s) or the full corpus
    std::vector<Message> messages;             // history followed by the new user turn
};

// Versioned system-prompt template. Slots: {display_name}, {field_tag},
// {profile}, {style}. The context block is appended under context_header.
struct PromptTemplate {
    std::string version = "persona-v1";
    std::string system =
        "You are {display_name}, a content creator known for {field_tag}. Stay in character for the whole "
        "conversation and talk to the user as one of your fans.\n\nProfile:\n{profile}\n\n{style}";
    std::string style = "Answer in your own voice, grounded in the provided context when there is one.";
    std::string context_header = "Reference material from your own videos:";
};

struct AgentConfig {
    provider::ModelSettings model;
    std::size_t top_k = 1;
    std::size_t context_budget_tokens = 32000;
    PromptTemplate prompt;
};

// One persona's serving logic. Holds the knowledge index (for profile_rag)
// and the full cleaned corpus (for long_context); the mode is chosen per
// session. Safe for concurrent use across sessions.
class PersonaAgent {
public:
    PersonaAgent(corpus::PersonaRecord persona, AgentConfig config, std::shared_ptr<provider::ChatPort> chat,
                 std::shared_ptr<provider::EmbedPort> embedder = nullptr,
                 std::shared_ptr<const retrieval::KnowledgeIndex> index = nullptr, std::string full_corpus = {},
                 std::shared_ptr<const retrieval::TokenizerPort> tokenizer = nullptr);

    const corpus::PersonaRecord& persona() const noexcept { return persona_; }
    const AgentConfig& config() const noexcept { return config_; }

    // Startup check for a mode: MissingIndex for profile_rag without an
    // index, ContextBudgetExceeded when the corpus cannot fit long_context.
    void check_mode(ServeMode mode) const;

    AssembledPrompt assemble_prompt(const ChatSession& session, const std::string& user_msg) const;
    provider::ChatRequest render(const AssembledPrompt& prompt, std::string task) const;

    // Appends the user turn and the reply to the session history.
    std::string respond(ChatSession& session, const std::string& user_msg, std::string task = "persona_reply") const;

    ChatSession new_session(std::string session_id, ServeMode mode) const;

private:
    corpus::PersonaRecord persona_;
    AgentConfig config_;
    std::shared_ptr<provider::ChatPort> chat_;
    std::shared_ptr<provider::EmbedPort> embedder_;
    std::shared_ptr<const retrieval::KnowledgeIndex> index_;
    std::string full_corpus_;
    std::shared_ptr<const retrieval::TokenizerPort> tokenizer_;
};

// In-memory session registry. A session accepts one turn at a time: a second
// concurrent message is rejected with Busy rather than queued.
class SessionStore {
public:
    explicit SessionStore(std::map<std::string, std::shared_ptr<const PersonaAgent>> agents);

    std::string create(const std::string& persona_id, ServeMode mode);
    ChatSession get(const std::string& session_id) const;
    std::string send(const std::string& session_id, const std::string& content);

    const PersonaAgent* agent(const std::string& persona_id) const;

private:
    struct Entry {
        std::mutex turn;
        mutable std::mutex data;
        ChatSession session;
    };
    std::shared_ptr<Entry> find(const std::string& session_id) const;

    std::map<std::string, std::shared_ptr<const PersonaAgent>> agents_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t next_id_ = 1;
};

// The persona side of a simulated conversation.
class PersonaEndpoint {
public:
    virtual ~PersonaEndpoint() = default;
    // Opens a fresh conversation; throws ServiceUnreachable if unavailable.
    virtual void open() = 0;
    virtual std::string reply(const std::string& fan_message) = 0;
};

class LocalPersonaEndpoint final : public PersonaEndpoint {
public:
    LocalPersonaEndpoint(std::shared_ptr<const PersonaAgent> agent, ServeMode mode, std::string session_id)
        : agent_(std::move(agent)), mode_(mode), session_id_(std::move(session_id)) {}

    void open() override;
    std::string reply(const std::string& fan_message) override;

private:
    std::shared_ptr<const PersonaAgent> agent_;
    ServeMode mode_;
    std::string session_id_;
    std::optional<ChatSession> session_;
};

}  // namespace forge::persona
