#include "forge/forge.h"

#include <cstdlib>
#include <cstring>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "app/pipeline.hpp"
#include "common/errors.hpp"
#include "persona/server.hpp"
#include "stats/correlation.hpp"

static_assert(static_cast<int>(forge::Errc::Internal) == FORGE_E_INTERNAL, "forge_status and Errc out of sync");
static_assert(static_cast<int>(forge::Errc::NotDefined) == FORGE_E_NOT_DEFINED, "forge_status and Errc out of sync");

struct forge_context {
    std::unique_ptr<forge::app::Workspace> ws;
};

struct forge_server {
    std::shared_ptr<forge::persona::SessionStore> store;
    std::unique_ptr<forge::persona::PersonaServer> http;
};

struct forge_chat {
    std::shared_ptr<const forge::persona::PersonaAgent> agent;
    forge::persona::ChatSession session;
    std::mutex mu;
};

namespace {

thread_local std::string g_last_error;

forge_status set_error(forge_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

template <class Fn>
forge_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FORGE_OK;
    } catch (const forge::Error& e) {
        return set_error(static_cast<forge_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(FORGE_E_INTERNAL, "Internal: out of memory");
    } catch (const std::exception& e) {
        return set_error(FORGE_E_INTERNAL, std::string("Internal: ") + e.what());
    } catch (...) {
        return set_error(FORGE_E_INTERNAL, "Internal: unknown exception");
    }
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

void emit(char** out, const forge::Json& j) {
    if (out) *out = dup_string(j.dump(2));
}

std::string need(const char* s, const char* what) {
    forge::require(s != nullptr && *s != '\0', forge::Errc::Usage, std::string(what) + " is required");
    return s;
}

void need_handle(const void* h) { forge::require(h != nullptr, forge::Errc::Usage, "null handle"); }

forge::persona::ServeMode mode_or_default(const char* mode) {
    return mode && *mode ? forge::persona::parse_mode(mode) : forge::persona::ServeMode::ProfileRag;
}

void configure_logging(int level) {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_logger_mt("forge");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
    });
    switch (level) {
        case FORGE_LOG_QUIET: spdlog::set_level(spdlog::level::off); break;
        case FORGE_LOG_INFO: spdlog::set_level(spdlog::level::info); break;
        case FORGE_LOG_DEBUG: spdlog::set_level(spdlog::level::debug); break;
        default: spdlog::set_level(spdlog::level::warn); break;
    }
}

using CoefFn = std::optional<double> (*)(const std::vector<double>&, const std::vector<double>&);

forge_status coefficient(CoefFn fn, const double* x, const double* y, size_t n, double* out) {
    return guarded([&] {
        forge::require(out != nullptr && (n == 0 || (x && y)), forge::Errc::Usage, "null argument");
        const auto r = fn(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
        forge::require(r.has_value(), forge::Errc::NotDefined, "coefficient is not defined (constant input or n < 2)");
        *out = *r;
    });
}

}  // namespace

extern "C" {

const char* forge_version(void) { return "0.1.0"; }

const char* forge_status_name(forge_status status) {
    if (status < FORGE_OK || status >= FORGE_STATUS_COUNT_) return "Unknown";
    return forge::errc_name(static_cast<forge::Errc>(status)).data();
}

int forge_exit_code(forge_status status) {
    if (status == FORGE_OK) return 0;
    if (status < FORGE_OK || status >= FORGE_STATUS_COUNT_) return 1;
    return forge::is_validation_error(static_cast<forge::Errc>(status)) ? 2 : 1;
}

const char* forge_last_error(void) { return g_last_error.c_str(); }

void forge_string_free(char* s) { std::free(s); }

void forge_options_init(forge_options* options) {
    if (!options) return;
    *options = forge_options{};
    options->workspace = ".";
    options->log_level = FORGE_LOG_WARN;
}

forge_status forge_context_create(const forge_options* options, forge_context** out) {
    return guarded([&] {
        forge::require(options != nullptr && out != nullptr, forge::Errc::Usage, "null argument");
        configure_logging(options->log_level);
        forge::app::RunOptions run;
        run.workspace = options->workspace && *options->workspace ? options->workspace : ".";
        if (options->config_path && *options->config_path) run.config_path = options->config_path;
        if (options->has_seed) run.seed = options->seed;
        run.mock = options->mock != 0;
        auto ctx = std::make_unique<forge_context>();
        ctx->ws = std::make_unique<forge::app::Workspace>(run);
        *out = ctx.release();
    });
}

void forge_context_destroy(forge_context* ctx) { delete ctx; }

forge_status forge_ingest(forge_context* ctx, const char* persona, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        emit(out_json, ctx->ws->ingest(need(persona, "persona")));
    });
}

forge_status forge_clean(forge_context* ctx, const char* persona, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        emit(out_json, ctx->ws->clean(need(persona, "persona")));
    });
}

forge_status forge_synth(forge_context* ctx, const char* persona, int pairs_per_opinion, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        std::optional<int> pairs;
        if (pairs_per_opinion != 0) pairs = pairs_per_opinion;
        emit(out_json, ctx->ws->synth(need(persona, "persona"), pairs));
    });
}

forge_status forge_filter(forge_context* ctx, const char* persona, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        emit(out_json, ctx->ws->filter(need(persona, "persona")));
    });
}

forge_status forge_build_train(forge_context* ctx, const char* persona, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        emit(out_json, ctx->ws->build_train(need(persona, "persona")));
    });
}

forge_status forge_index(forge_context* ctx, const char* persona, size_t max_tokens, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        std::optional<std::size_t> budget;
        if (max_tokens != 0) budget = max_tokens;
        emit(out_json, ctx->ws->index(need(persona, "persona"), budget));
    });
}

forge_status forge_search(forge_context* ctx, const char* persona, const char* query, size_t k, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        std::optional<std::size_t> top;
        if (k != 0) top = k;
        emit(out_json, ctx->ws->search(need(persona, "persona"), need(query, "query"), top));
    });
}

forge_status forge_eval_mcq(forge_context* ctx, const char* persona, const char* dimension, const char* mode,
                            int full, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        std::optional<forge::evalkit::McqDimension> dim;
        if (dimension && *dimension) dim = forge::evalkit::parse_mcq_dimension(dimension);
        emit(out_json, ctx->ws->eval_mcq(need(persona, "persona"), dim, mode_or_default(mode), full != 0));
    });
}

forge_status forge_eval_fan(forge_context* ctx, const char* persona, const char* fan_type, const char* mode,
                            size_t sessions, const char* persona_url, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        std::optional<forge::evalkit::FanType> type;
        if (fan_type && *fan_type) type = forge::evalkit::parse_fan_type(fan_type);
        std::optional<std::size_t> n;
        if (sessions != 0) n = sessions;
        std::optional<std::string> url;
        if (persona_url && *persona_url) url = persona_url;
        emit(out_json, ctx->ws->eval_fan(need(persona, "persona"), type, mode_or_default(mode), n, url));
    });
}

forge_status forge_report(forge_context* ctx, const char* persona, const char* format, char** out_doc) {
    return guarded([&] {
        need_handle(ctx);
        const auto fmt = forge::stats::parse_report_format(format && *format ? format : "table_text");
        const auto doc = ctx->ws->report(need(persona, "persona"), fmt);
        if (out_doc) *out_doc = dup_string(doc);
    });
}

forge_status forge_correlate(forge_context* ctx, const char* persona, const char* human_csv, const char* mode,
                             const char* unit, char** out_json) {
    return guarded([&] {
        need_handle(ctx);
        const auto u = forge::stats::parse_correlation_unit(unit && *unit ? unit : "item");
        emit(out_json,
             ctx->ws->correlate(need(persona, "persona"), need(human_csv, "human CSV path"), mode_or_default(mode), u));
    });
}

forge_status forge_server_create(forge_context* ctx, const char* const* personas, size_t n_personas,
                                 const char* mode, const char* ui_dir, const char* transcript_log,
                                 forge_server** out) {
    return guarded([&] {
        need_handle(ctx);
        forge::require(out != nullptr && (n_personas == 0 || personas != nullptr), forge::Errc::Usage,
                       "null argument");
        std::vector<std::string> ids;
        for (size_t i = 0; i < n_personas; ++i) ids.push_back(need(personas[i], "persona"));
        const auto m = mode_or_default(mode);
        auto server = std::make_unique<forge_server>();
        server->store = ctx->ws->make_store(ids, m);
        forge::persona::PersonaServer::Options opts;
        opts.default_mode = m;
        if (ui_dir && *ui_dir) opts.ui_dir = ui_dir;
        if (transcript_log && *transcript_log) opts.transcript_log = transcript_log;
        server->http = std::make_unique<forge::persona::PersonaServer>(server->store, opts);
        *out = server.release();
    });
}

forge_status forge_server_bind(forge_server* server, const char* host, int port, int* bound_port) {
    return guarded([&] {
        need_handle(server);
        const std::string h = host && *host ? host : "127.0.0.1";
        int p = port;
        if (port == 0) {
            p = server->http->bind_any_port(h);
            forge::require(p > 0, forge::Errc::IoFailure, "could not bind " + h);
        } else {
            forge::require(server->http->bind(h, port), forge::Errc::IoFailure,
                           "could not bind " + h + ":" + std::to_string(port));
        }
        if (bound_port) *bound_port = p;
    });
}

forge_status forge_server_run(forge_server* server) {
    return guarded([&] {
        need_handle(server);
        forge::require(server->http->listen_after_bind(), forge::Errc::IoFailure, "server stopped with an error");
    });
}

void forge_server_stop(forge_server* server) {
    if (server) server->http->stop();
}

void forge_server_destroy(forge_server* server) { delete server; }

forge_status forge_chat_open(forge_context* ctx, const char* persona, const char* mode, forge_chat** out) {
    return guarded([&] {
        need_handle(ctx);
        forge::require(out != nullptr, forge::Errc::Usage, "null argument");
        const auto m = mode_or_default(mode);
        auto chat = std::make_unique<forge_chat>();
        chat->agent = ctx->ws->make_agent(need(persona, "persona"), m);
        chat->session = chat->agent->new_session("repl-1", m);
        *out = chat.release();
    });
}

forge_status forge_chat_send(forge_chat* chat, const char* message, char** out_reply) {
    return guarded([&] {
        need_handle(chat);
        forge::require(message != nullptr, forge::Errc::Usage, "null message");
        std::unique_lock lock(chat->mu, std::try_to_lock);
        forge::require(lock.owns_lock(), forge::Errc::Busy, "chat is already handling a message");
        const auto reply = chat->agent->respond(chat->session, message);
        if (out_reply) *out_reply = dup_string(reply);
    });
}

forge_status forge_chat_history(forge_chat* chat, char** out_json) {
    return guarded([&] {
        need_handle(chat);
        std::lock_guard lock(chat->mu);
        emit(out_json, chat->session.to_json());
    });
}

void forge_chat_close(forge_chat* chat) { delete chat; }

forge_status forge_pearson(const double* x, const double* y, size_t n, double* out) {
    return coefficient(&forge::stats::pearson, x, y, n, out);
}

forge_status forge_spearman(const double* x, const double* y, size_t n, double* out) {
    return coefficient(&forge::stats::spearman, x, y, n, out);
}

forge_status forge_kendall(const double* x, const double* y, size_t n, double* out) {
    return coefficient(&forge::stats::kendall, x, y, n, out);
}

}  // extern "C"
