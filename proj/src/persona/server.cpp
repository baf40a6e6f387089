#include "persona/server.hpp"

#include <fstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::persona {

namespace {

int http_status_for(Errc code) {
    switch (code) {
        case Errc::NotFound: return 404;
        case Errc::Busy: return 409;
        case Errc::EmptyMessage:
        case Errc::InvalidRequest:
        case Errc::Usage:
        case Errc::MalformedRecord: return 400;
        case Errc::MissingIndex:
        case Errc::ContextBudgetExceeded:
        case Errc::MissingUpstreamArtifact: return 422;
        case Errc::ProviderFailure:
        case Errc::RateLimited: return 502;
        default: return 500;
    }
}

void send_error(httplib::Response& res, const Error& e) {
    res.status = http_status_for(e.code());
    res.set_content(Json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump(), "application/json");
}

Json parse_body(const httplib::Request& req) {
    auto j = Json::parse(req.body, nullptr, false);
    require(!j.is_discarded() && j.is_object(), Errc::InvalidRequest, "request body must be a JSON object");
    return j;
}

// Splits a reply into word-sized pieces, keeping trailing whitespace attached.
std::vector<std::string> stream_pieces(const std::string& reply) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < reply.size(); ++i) {
        cur.push_back(reply[i]);
        const bool space = reply[i] == ' ' || reply[i] == '\n';
        const bool next_space = i + 1 < reply.size() && (reply[i + 1] == ' ' || reply[i + 1] == '\n');
        if (space && !next_space) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace

PersonaServer::PersonaServer(std::shared_ptr<SessionStore> store, Options options)
    : store_(std::move(store)), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
    install_routes();
}

PersonaServer::~PersonaServer() { stop(); }

void PersonaServer::install_routes() {
    auto guarded = [](auto handler) {
        return [handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const std::exception& e) {
                send_error(res, Error(Errc::Internal, e.what()));
            }
        };
    };

    http_->Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        require(body.contains("persona_id") && body["persona_id"].is_string(), Errc::InvalidRequest,
                "persona_id is required");
        const auto mode = body.contains("mode") ? parse_mode(body["mode"].get<std::string>()) : options_.default_mode;
        const auto id = store_->create(body["persona_id"].get<std::string>(), mode);
        res.status = 201;
        res.set_content(Json{{"session_id", id}, {"mode", mode_name(mode)}}.dump(), "application/json");
    }));

    http_->Get(R"(/v1/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        res.set_content(store_->get(req.matches[1]).to_json().dump(), "application/json");
    }));

    http_->Post(R"(/v1/sessions/([^/]+)/messages)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    const auto body = parse_body(req);
                    require(body.contains("content") && body["content"].is_string(), Errc::InvalidRequest,
                            "content is required");
                    const auto content = body["content"].get<std::string>();
                    const auto reply = store_->send(id, content);
                    log_turn(id, content, reply);
                    if (req.get_header_value("Accept").find("application/x-ndjson") == std::string::npos) {
                        res.set_content(Json{{"reply", reply}}.dump(), "application/json");
                        return;
                    }
                    auto pieces = std::make_shared<std::vector<std::string>>(stream_pieces(reply));
                    auto full = std::make_shared<std::string>(reply);
                    res.set_chunked_content_provider(
                        "application/x-ndjson", [pieces, full, next = std::size_t{0}](
                                                    std::size_t, httplib::DataSink& sink) mutable {
                            if (next < pieces->size()) {
                                const auto line = Json{{"delta", (*pieces)[next++]}}.dump() + "\n";
                                return sink.write(line.data(), line.size());
                            }
                            const auto done = Json{{"done", true}, {"reply", *full}}.dump() + "\n";
                            sink.write(done.data(), done.size());
                            sink.done();
                            return true;
                        });
                }));

    if (options_.ui_dir) http_->set_mount_point("/ui", options_.ui_dir->string());
}

void PersonaServer::log_turn(const std::string& session_id, const std::string& content, const std::string& reply) {
    if (!options_.transcript_log) return;
    std::lock_guard lock(log_mu_);
    std::ofstream out(*options_.transcript_log, std::ios::app);
    out << Json{{"session_id", session_id}, {"user", content}, {"assistant", reply}}.dump() << '\n';
}

int PersonaServer::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool PersonaServer::bind(const std::string& host, int port) { return http_->bind_to_port(host, port); }

bool PersonaServer::listen_after_bind() { return http_->listen_after_bind(); }

void PersonaServer::stop() {
    if (http_ && http_->is_running()) http_->stop();
}

void PersonaServer::wait_until_ready() const { http_->wait_until_ready(); }

namespace {

httplib::Client make_client(const std::string& base_url) {
    httplib::Client c(base_url);
    c.set_connection_timeout(std::chrono::seconds(5));
    c.set_read_timeout(std::chrono::seconds(300));
    return c;
}

Json expect_json(const httplib::Result& res, const std::string& what) {
    require(static_cast<bool>(res), Errc::ServiceUnreachable, what + ": " + httplib::to_string(res.error()));
    auto body = Json::parse(res->body, nullptr, false);
    if (res->status >= 300) {
        const auto msg = body.is_object() ? body.value("message", res->body) : res->body;
        fail(res->status == 502 ? Errc::ProviderFailure : Errc::InvalidRequest,
             what + ": HTTP " + std::to_string(res->status) + " " + msg);
    }
    require(!body.is_discarded(), Errc::ProviderFailure, what + ": non-JSON reply");
    return body;
}

}  // namespace

void HttpPersonaEndpoint::open() {
    auto client = make_client(base_url_);
    auto res = client.Post("/v1/sessions", Json{{"persona_id", persona_id_}, {"mode", mode_name(mode_)}}.dump(),
                           "application/json");
    session_id_ = expect_json(res, "create session").at("session_id").get<std::string>();
}

std::string HttpPersonaEndpoint::reply(const std::string& fan_message) {
    require(!session_id_.empty(), Errc::ServiceUnreachable, "endpoint not opened");
    auto client = make_client(base_url_);
    auto res = client.Post("/v1/sessions/" + session_id_ + "/messages", Json{{"content", fan_message}}.dump(),
                           "application/json");
    return expect_json(res, "send message").at("reply").get<std::string>();
}

}  // namespace forge::persona
