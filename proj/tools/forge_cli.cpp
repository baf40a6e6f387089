// Command-line front end. Talks to the toolkit only through the C API.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "forge/forge.h"

namespace {

struct Globals {
    std::string workspace = ".";
    std::string config;
    std::optional<std::uint64_t> seed;
    bool mock = false;
    std::string persona;
    bool json = false;
    int verbose = 0;
    bool quiet = false;
};

struct CString {
    char* p = nullptr;
    ~CString() { forge_string_free(p); }
    char** out() { return &p; }
    std::string str() const { return p ? p : ""; }
};

int report_failure(forge_status st) {
    std::cerr << "error: " << forge_last_error() << "\n";
    return forge_exit_code(st);
}

class Session {
public:
    explicit Session(const Globals& g) {
        forge_options opts;
        forge_options_init(&opts);
        opts.workspace = g.workspace.c_str();
        opts.config_path = g.config.empty() ? nullptr : g.config.c_str();
        opts.has_seed = g.seed.has_value();
        opts.seed = g.seed.value_or(0);
        opts.mock = g.mock;
        opts.log_level = g.quiet ? FORGE_LOG_QUIET : g.verbose >= 2 ? FORGE_LOG_DEBUG : g.verbose == 1 ? FORGE_LOG_INFO
                                                                                                          : FORGE_LOG_WARN;
        status_ = forge_context_create(&opts, &ctx_);
    }
    ~Session() { forge_context_destroy(ctx_); }
    forge_status status() const { return status_; }
    forge_context* get() const { return ctx_; }

private:
    forge_context* ctx_ = nullptr;
    forge_status status_ = FORGE_OK;
};

// Stage summaries: JSON with --json, otherwise one "key=value" line.
void print_summary(const std::string& json_text, bool as_json) {
    if (as_json) {
        std::cout << json_text << "\n";
        return;
    }
    const auto j = nlohmann::json::parse(json_text, nullptr, false);
    if (!j.is_object()) {
        std::cout << json_text << "\n";
        return;
    }
    std::string line;
    for (const auto& [k, v] : j.items()) {
        if (!line.empty()) line += " ";
        line += k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
    }
    std::cout << line << "\n";
}

int run_chat(forge_context* ctx, const std::string& persona, const std::string& mode) {
    forge_chat* chat = nullptr;
    if (auto st = forge_chat_open(ctx, persona.c_str(), mode.c_str(), &chat); st != FORGE_OK) return report_failure(st);
    std::unique_ptr<forge_chat, decltype(&forge_chat_close)> guard(chat, &forge_chat_close);
    const bool interactive = isatty(STDIN_FILENO);
    std::string line;
    while (true) {
        if (interactive) std::cout << "you> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        if (line == "/quit" || line == "/exit") break;
        if (line == "/history") {
            CString h;
            if (auto st = forge_chat_history(chat, h.out()); st != FORGE_OK) return report_failure(st);
            std::cout << h.str() << "\n";
            continue;
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        CString reply;
        if (auto st = forge_chat_send(chat, line.c_str(), reply.out()); st != FORGE_OK) return report_failure(st);
        std::cout << (interactive ? persona + "> " : "") << reply.str() << "\n" << std::flush;
    }
    return 0;
}

int run_serve(forge_context* ctx, const std::string& persona, const std::string& mode, const std::string& host,
              int port, const std::string& ui_dir, const std::string& log_path) {
    // Signals are taken synchronously by a dedicated thread; every thread
    // spawned after this point inherits the blocked mask.
    sigset_t sigs;
    sigemptyset(&sigs);
    sigaddset(&sigs, SIGINT);
    sigaddset(&sigs, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

    const char* ids[] = {persona.c_str()};
    forge_server* server = nullptr;
    if (auto st = forge_server_create(ctx, ids, 1, mode.c_str(), ui_dir.empty() ? nullptr : ui_dir.c_str(),
                                      log_path.empty() ? nullptr : log_path.c_str(), &server);
        st != FORGE_OK)
        return report_failure(st);
    std::unique_ptr<forge_server, decltype(&forge_server_destroy)> guard(server, &forge_server_destroy);
    int bound = 0;
    if (auto st = forge_server_bind(server, host.c_str(), port, &bound); st != FORGE_OK) return report_failure(st);
    std::cout << "listening on http://" << host << ":" << bound << "\n" << std::flush;

    std::thread([server, sigs] {
        int sig = 0;
        sigwait(&sigs, &sig);
        forge_server_stop(server);
    }).detach();
    if (auto st = forge_server_run(server); st != FORGE_OK) return report_failure(st);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: build, serve and evaluate knowledge-grounded persona agents"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("-w,--workspace", g.workspace, "Workspace root")->capture_default_str();
    app.add_option("--config", g.config, "Config file (default <workspace>/forge.toml)");
    app.add_option("--seed", g.seed, "Global seed, overrides the config");
    app.add_flag("--mock", g.mock, "Use the offline seeded providers");
    app.add_option("-p,--persona", g.persona, "Persona id");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_flag("-v,--verbose", g.verbose, "More logging (repeatable)");
    app.add_flag("-q,--quiet", g.quiet, "No logging");

    auto* ingest = app.add_subcommand("ingest", "Read raw/<persona>/ into a validated corpus bundle");
    auto* clean = app.add_subcommand("clean", "Correct transcripts and scrub private data");
    auto* synth = app.add_subcommand("synth", "Extract meta-opinions and synthesize dialogue pairs");
    int pairs = 0;
    synth->add_option("--pairs-per-opinion", pairs, "Pairs per opinion (default from config)")
        ->check(CLI::PositiveNumber);
    auto* filter = app.add_subcommand("filter", "Flag counter-intuitive dialogue pairs");
    auto* build_train = app.add_subcommand("build-train", "Assemble and export the training set");
    auto* index = app.add_subcommand("index", "Chunk the cleaned corpus and build the knowledge index");
    std::size_t max_tokens = 0;
    index->add_option("--max-tokens", max_tokens, "Chunk size in tokens (default from config)")
        ->check(CLI::PositiveNumber);
    auto* search = app.add_subcommand("search", "Query the knowledge index");
    std::string query;
    std::size_t k = 0;
    search->add_option("query,--query", query, "Query text")->required();
    search->add_option("-k,--k,--top-k", k, "Number of hits (default from config)")->check(CLI::PositiveNumber);

    const auto modes = CLI::IsMember({"profile_only", "profile_rag", "long_context"});
    std::string mode = "profile_rag";
    auto* serve = app.add_subcommand("serve", "Run the HTTP persona service");
    std::string host = "127.0.0.1", ui_dir, log_path;
    int port = 8080;
    serve->add_option("--mode", mode, "Default serve mode")->check(modes)->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535))->capture_default_str();
    serve->add_option("--ui-dir", ui_dir, "Static web chat client to mount at /ui");
    serve->add_option("--transcript-log", log_path, "Append every turn to this JSONL file");

    auto* chat = app.add_subcommand("chat", "Talk to a persona in the terminal");
    chat->add_option("--mode", mode, "Serve mode")->check(modes)->capture_default_str();

    auto* eval_mcq = app.add_subcommand("eval-mcq", "Generate and grade multiple-choice questions");
    std::string dimension;
    bool full = false;
    eval_mcq->add_option("--dimension", dimension, "knowledge or tone (default both)")
        ->check(CLI::IsMember({"knowledge", "tone"}));
    eval_mcq->add_option("--mode", mode, "Serve mode under test")->check(modes)->capture_default_str();
    eval_mcq->add_flag("--full", full, "Full-scale question budget");

    auto* eval_fan = app.add_subcommand("eval-fan", "Simulate and judge fan conversations");
    std::string fan_type, persona_url;
    std::size_t sessions = 0;
    eval_fan->add_option("--fan-type", fan_type, "new or old (default both)")->check(CLI::IsMember({"new", "old"}));
    eval_fan->add_option("--mode", mode, "Serve mode under test")->check(modes)->capture_default_str();
    eval_fan->add_option("--sessions", sessions, "Sessions per fan type (default from config)")
        ->check(CLI::PositiveNumber);
    eval_fan->add_option("--persona-url", persona_url, "Use a running `forge serve` at this base URL");

    auto* report = app.add_subcommand("report", "Aggregate evaluation results");
    std::string format = "table_text";
    report->add_option("--format", format, "table_text, json or csv")
        ->check(CLI::IsMember({"table_text", "json", "csv"}))
        ->capture_default_str();

    auto* correlate = app.add_subcommand("correlate", "Correlate judge scores with human annotations");
    std::string human, unit = "item";
    correlate->add_option("--human", human, "CSV: session_id,dimension,score,annotator_id")->required();
    correlate->add_option("--mode", mode, "Serve mode whose scores to use")->check(modes)->capture_default_str();
    correlate->add_option("--unit", unit, "item or session")->check(CLI::IsMember({"item", "session"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        if (argc > 1 && argv[1][0] != '-') {
            bool known = false;
            for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
                known = known || sub->get_name() == argv[1];
            if (!known) msg = std::string("unknown subcommand '") + argv[1] + "'";
        }
        std::cerr << "error: " << msg << "\n\n" << app.help() << std::flush;
        return 2;
    }

    auto* cmd = app.get_subcommands().front();
    if (g.persona.empty()) {
        std::cerr << "error: --persona is required for '" << cmd->get_name() << "'\n";
        return 2;
    }

    Session session(g);
    if (session.status() != FORGE_OK) return report_failure(session.status());
    forge_context* ctx = session.get();
    const char* persona = g.persona.c_str();

    CString out;
    forge_status st = FORGE_OK;
    if (cmd == ingest) st = forge_ingest(ctx, persona, out.out());
    else if (cmd == clean) st = forge_clean(ctx, persona, out.out());
    else if (cmd == synth) st = forge_synth(ctx, persona, pairs, out.out());
    else if (cmd == filter) st = forge_filter(ctx, persona, out.out());
    else if (cmd == build_train) st = forge_build_train(ctx, persona, out.out());
    else if (cmd == index) st = forge_index(ctx, persona, max_tokens, out.out());
    else if (cmd == search) {
        st = forge_search(ctx, persona, query.c_str(), k, out.out());
        if (st == FORGE_OK && !g.json) {
            for (const auto& hit : nlohmann::json::parse(out.str()))
                std::cout << "[" << hit["chunk_id"].dump() << " " << hit["score"].get<double>() << "] "
                          << hit["text"].get<std::string>() << "\n";
            return 0;
        }
    } else if (cmd == serve) {
        return run_serve(ctx, g.persona, mode, host, port, ui_dir, log_path);
    } else if (cmd == chat) {
        return run_chat(ctx, g.persona, mode);
    } else if (cmd == eval_mcq) {
        st = forge_eval_mcq(ctx, persona, dimension.empty() ? nullptr : dimension.c_str(), mode.c_str(), full,
                            out.out());
    } else if (cmd == eval_fan) {
        st = forge_eval_fan(ctx, persona, fan_type.empty() ? nullptr : fan_type.c_str(), mode.c_str(), sessions,
                            persona_url.empty() ? nullptr : persona_url.c_str(), out.out());
    } else if (cmd == report) {
        st = forge_report(ctx, persona, g.json ? "json" : format.c_str(), out.out());
        if (st == FORGE_OK) {
            std::cout << out.str();
            return 0;
        }
    } else if (cmd == correlate) {
        st = forge_correlate(ctx, persona, human.c_str(), mode.c_str(), unit.c_str(), out.out());
        if (st == FORGE_OK) {
            std::cout << out.str() << "\n";
            return 0;
        }
    }
    if (st != FORGE_OK) return report_failure(st);
    print_summary(out.str(), g.json);
    return 0;
}
