#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <thread>

#include "forge/forge.h"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Owns a C string returned by the library.
struct Owned {
    char* p = nullptr;
    ~Owned() { forge_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct Context {
    forge_context* ctx = nullptr;
    forge::test::TempDir dir;

    Context() {
        fs::copy(fs::path(FORGE_FIXTURE_DIR) / "workspace", dir / "ws", fs::copy_options::recursive);
        const auto root = (dir / "ws").string();
        forge_options o;
        forge_options_init(&o);
        o.workspace = root.c_str();
        o.mock = 1;
        o.log_level = FORGE_LOG_QUIET;
        REQUIRE(forge_context_create(&o, &ctx) == FORGE_OK);
    }
    ~Context() { forge_context_destroy(ctx); }
};

}  // namespace

TEST_CASE("status names and exit codes") {
    CHECK(std::string(forge_status_name(FORGE_OK)) == "Ok");
    CHECK(std::string(forge_status_name(FORGE_E_MISSING_UPSTREAM_ARTIFACT)) == "MissingUpstreamArtifact");
    CHECK(std::string(forge_status_name(FORGE_E_INTERNAL)) == "Internal");
    CHECK(forge_exit_code(FORGE_OK) == 0);
    CHECK(forge_exit_code(FORGE_E_USAGE) == 2);
    CHECK(forge_exit_code(FORGE_E_PROVIDER_FAILURE) == 1);
    CHECK(std::string(forge_version()).size() > 0);
}

TEST_CASE("correlation through the C API") {
    const double x[] = {1, 2, 3, 4}, y[] = {1, 3, 2, 4}, flat[] = {2, 2, 2, 2};
    double r = 0;
    CHECK(forge_kendall(x, y, 4, &r) == FORGE_OK);
    CHECK(r == doctest::Approx(4.0 / 6.0));
    CHECK(forge_pearson(x, x, 4, &r) == FORGE_OK);
    CHECK(r == doctest::Approx(1.0));
    CHECK(forge_spearman(x, flat, 4, &r) == FORGE_E_NOT_DEFINED);
    CHECK(forge_pearson(nullptr, y, 4, &r) != FORGE_OK);
}

TEST_CASE("errors carry a message and a status") {
    Context c;
    Owned out;
    CHECK(forge_filter(c.ctx, "demo_chef", &out.p) == FORGE_E_MISSING_UPSTREAM_ARTIFACT);
    CHECK(std::string(forge_last_error()).find("synth") != std::string::npos);
    CHECK(forge_ingest(c.ctx, "../x", &out.p) == FORGE_E_USAGE);
    CHECK(forge_ingest(nullptr, "demo_chef", &out.p) != FORGE_OK);

    forge_context* bad = nullptr;
    forge_options o;
    forge_options_init(&o);
    const auto cfg = (c.dir / "broken.toml").string();
    forge::test::write(cfg, "[pipeline]\ntop_k = -3\n");
    o.config_path = cfg.c_str();
    o.log_level = FORGE_LOG_QUIET;
    CHECK(forge_context_create(&o, &bad) == FORGE_E_CONFIG_INVALID);
    CHECK(bad == nullptr);
}

TEST_CASE("pipeline, chat and server through the C API") {
    Context c;
    const char* p = "demo_chef";
    {
        Owned o;
        REQUIRE(forge_ingest(c.ctx, p, &o.p) == FORGE_OK);
        CHECK(json::parse(o.str())["transcripts"] == 5);
    }
    Owned a, b, d, e, f;
    REQUIRE(forge_clean(c.ctx, p, &a.p) == FORGE_OK);
    REQUIRE(forge_index(c.ctx, p, 0, &b.p) == FORGE_OK);
    REQUIRE(forge_search(c.ctx, p, "resting meat", 1, &d.p) == FORGE_OK);
    CHECK(json::parse(d.str()).size() == 1);

    forge_chat* chat = nullptr;
    REQUIRE(forge_chat_open(c.ctx, p, "profile_rag", &chat) == FORGE_OK);
    Owned reply, empty, hist;
    CHECK(forge_chat_send(chat, "How long should steak rest?", &reply.p) == FORGE_OK);
    CHECK(!reply.str().empty());
    CHECK(forge_chat_send(chat, "", &empty.p) == FORGE_E_EMPTY_MESSAGE);
    REQUIRE(forge_chat_history(chat, &hist.p) == FORGE_OK);
    CHECK(json::parse(hist.str())["history"].size() == 2);
    forge_chat_close(chat);

    forge_server* server = nullptr;
    const char* personas[] = {p};
    REQUIRE(forge_server_create(c.ctx, personas, 1, "profile_rag", nullptr, nullptr, &server) == FORGE_OK);
    int port = 0;
    REQUIRE(forge_server_bind(server, "127.0.0.1", 0, &port) == FORGE_OK);
    CHECK(port > 0);
    std::thread runner([&] { forge_server_run(server); });
    httplib::Client client("127.0.0.1", port);
    httplib::Result created;
    for (int i = 0; i < 100 && !created; ++i) {
        created = client.Post("/v1/sessions", R"({"persona_id":"demo_chef"})", "application/json");
        if (!created) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["session_id"];
    auto msg = client.Post("/v1/sessions/" + id + "/messages", R"({"content":"hi"})", "application/json");
    REQUIRE(msg);
    CHECK(msg->status == 200);
    CHECK(client.Post("/v1/sessions", R"({"persona_id":"ghost"})", "application/json")->status == 404);
    forge_server_stop(server);
    runner.join();
    forge_server_destroy(server);

    REQUIRE(forge_eval_mcq(c.ctx, p, "knowledge", "profile_rag", 0, &e.p) == FORGE_OK);
    REQUIRE(forge_report(c.ctx, p, "csv", &f.p) == FORGE_OK);
    CHECK(f.str().rfind("persona_id,mode,Know", 0) == 0);
}
