#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "persona/agent.hpp"

namespace httplib {
class Server;
}

namespace forge::persona {

// HTTP front end for a SessionStore:
//   POST /v1/sessions                {persona_id, mode}  -> {session_id}
//   POST /v1/sessions/{id}/messages  {content}           -> {reply}
//   GET  /v1/sessions/{id}                               -> session + history
// A message request with `Accept: application/x-ndjson` streams the reply as
// {"delta": ...} lines followed by {"done": true, "reply": ...}.
class PersonaServer {
public:
    struct Options {
        ServeMode default_mode = ServeMode::ProfileRag;
        std::optional<std::filesystem::path> ui_dir;       // mounted at /ui
        std::optional<std::filesystem::path> transcript_log;  // JSONL, one line per turn
    };

    PersonaServer(std::shared_ptr<SessionStore> store, Options options);
    ~PersonaServer();

    // Binds to an ephemeral port and returns it; call listen_after_bind() next.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    void install_routes();
    void log_turn(const std::string& session_id, const std::string& content, const std::string& reply);

    std::shared_ptr<SessionStore> store_;
    Options options_;
    std::unique_ptr<httplib::Server> http_;
    std::mutex log_mu_;
};

// Talks to a running PersonaServer; one instance drives one conversation.
class HttpPersonaEndpoint final : public PersonaEndpoint {
public:
    HttpPersonaEndpoint(std::string base_url, std::string persona_id, ServeMode mode)
        : base_url_(std::move(base_url)), persona_id_(std::move(persona_id)), mode_(mode) {}

    void open() override;
    std::string reply(const std::string& fan_message) override;
    const std::string& session_id() const noexcept { return session_id_; }

private:
    std::string base_url_;
    std::string persona_id_;
    ServeMode mode_;
    std::string session_id_;
};

}  // namespace forge::persona
