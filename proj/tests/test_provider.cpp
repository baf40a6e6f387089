#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "provider/chat.hpp"
#include "provider/http_backend.hpp"
#include "provider/mocks.hpp"
#include "provider/synthetic_backend.hpp"
#include "support.hpp"

using namespace forge;
using namespace forge::provider;
using forge::test::code_of;

namespace {

ChatRequest user_request(const std::string& text) { return make_request({}, "test", {{Role::User, text}}); }

std::vector<std::chrono::milliseconds> g_sleeps;

ChatClient::Sleeper recording_sleeper() {
    g_sleeps.clear();
    return [](std::chrono::milliseconds d) { g_sleeps.push_back(d); };
}

// A loopback server standing in for a hosted chat/embedding API.
struct FakeApi {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::string last_auth;
    Json last_body;
    int chat_failures = 0;

    FakeApi() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            last_body = Json::parse(req.body);
            if (chat_failures > 0) {
                --chat_failures;
                res.status = 503;
                res.set_content("overloaded", "text/plain");
                return;
            }
            const std::string user = last_body["messages"].back()["content"];
            Json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "re: " + user}}},
                                     {"finish_reason", user == "long" ? "length" : "stop"}}}},
                       {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 3}}}};
            res.set_content(reply.dump(), "application/json");
        });
        server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = Json::parse(req.body);
            Json data = Json::array();
            // Deliberately reversed so the client has to honor "index".
            for (std::size_t i = body["input"].size(); i-- > 0;) {
                const std::string text = body["input"][i];
                data.push_back({{"index", i}, {"embedding", {static_cast<double>(text.size()), 1.0, 0.0}}});
            }
            res.set_content(Json{{"data", data}}.dump(), "application/json");
        });
        server.Post("/v1/bad/chat/completions", [](const httplib::Request&, httplib::Response& res) {
            res.status = 401;
            res.set_content("{\"error\":\"bad key\"}", "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeApi() {
        server.stop();
        thread.join();
    }
    std::string base(const std::string& prefix = "/v1") const {
        return "http://127.0.0.1:" + std::to_string(port) + prefix;
    }
};

}  // namespace

TEST_CASE("scripted mock") {
    ScriptedChat chat(std::map<std::string, std::string>{{"ping", "pong"}});
    CHECK(chat.chat(user_request("ping")).content == "pong");
    try {
        chat.chat(user_request("other"));
        FAIL("expected a throw");
    } catch (const BackendError& e) {
        CHECK_FALSE(e.retryable());
    }

    auto seq = ScriptedChat::sequence({"a", "b"});
    CHECK(seq->chat(user_request("x")).content == "a");
    CHECK(seq->chat(user_request("x")).content == "b");
    CHECK(seq->chat(user_request("x")).content == "b");
}

TEST_CASE("request validation") {
    ChatRequest empty;
    CHECK(code_of([&] { validate(empty); }) == Errc::InvalidRequest);
    auto ok = make_request({}, "t", {{Role::System, "s"}, {Role::User, "u"}, {Role::Assistant, "a"}, {Role::User, "v"}});
    CHECK_NOTHROW(validate(ok));
    auto bad = make_request({}, "t", {{Role::User, "u"}, {Role::User, "v"}});
    CHECK(code_of([&] { validate(bad); }) == Errc::InvalidRequest);
    auto starts_wrong = make_request({}, "t", {{Role::Assistant, "a"}});
    CHECK(code_of([&] { validate(starts_wrong); }) == Errc::InvalidRequest);

    auto echo = std::make_shared<EchoChat>();
    ChatClient client(echo, nullptr);
    CHECK(code_of([&] { client.chat(empty); }) == Errc::InvalidRequest);
    CHECK(echo->calls() == 0);
}

TEST_CASE("chat client caches identical requests") {
    auto echo = std::make_shared<EchoChat>();
    ChatClient client(echo, std::make_shared<ResponseCache>());
    CHECK(client.chat(user_request("hello")).content == "hello");
    CHECK(echo->calls() == 1);
    CHECK(client.chat(user_request("hello")).content == "hello");
    CHECK(echo->calls() == 1);

    auto warmer = user_request("hello");
    warmer.temperature = 0.7;
    client.chat(warmer);
    CHECK(echo->calls() == 2);
}

TEST_CASE("on-disk cache survives a new client") {
    test::TempDir dir;
    auto echo = std::make_shared<EchoChat>();
    {
        ChatClient client(echo, std::make_shared<ResponseCache>(dir.path()));
        client.chat(user_request("persist me"));
    }
    ChatClient again(echo, std::make_shared<ResponseCache>(dir.path()));
    CHECK(again.chat(user_request("persist me")).content == "persist me");
    CHECK(echo->calls() == 1);
    CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), {}) >= 1);
}

TEST_CASE("cache keys depend on backend, model and body") {
    auto a = user_request("x");
    auto b = a;
    b.model_id = "other";
    CHECK(cache_key("n", a) == cache_key("n", a));
    CHECK(cache_key("n", a) != cache_key("m", a));
    CHECK(cache_key("n", a) != cache_key("n", b));
    CHECK(cache_key("n", a).size() == 64);
}

TEST_CASE("retries back off exponentially and give up") {
    auto echo = std::make_shared<EchoChat>();
    auto flaky = std::make_shared<FlakyChat>(echo, 2);
    RetryPolicy policy;
    policy.base_delay = std::chrono::milliseconds(100);
    ChatClient client(flaky, nullptr, policy, recording_sleeper());
    CHECK(client.chat(user_request("eventually")).content == "eventually");
    CHECK(client.backend_calls() == 3);
    REQUIRE(g_sleeps.size() == 2);
    CHECK(g_sleeps[0].count() == 100);
    CHECK(g_sleeps[1].count() == 200);

    auto dead = std::make_shared<FlakyChat>(echo, 100, 429);
    ChatClient limited(dead, nullptr, policy, recording_sleeper());
    CHECK(code_of([&] { limited.chat(user_request("x")); }) == Errc::RateLimited);
    CHECK(limited.backend_calls() == 4);

    auto fatal = std::make_shared<FlakyChat>(echo, 1, 400);
    ChatClient no_retry(fatal, nullptr, policy, recording_sleeper());
    CHECK(code_of([&] { no_retry.chat(user_request("x")); }) == Errc::ProviderFailure);
    CHECK(no_retry.backend_calls() == 1);
}

TEST_CASE("hash embedder") {
    HashEmbedder e(64);
    auto v = e.embed({"a", "b"});
    REQUIRE(v.size() == 2);
    CHECK(v[0].dimension() == 64);
    CHECK(v[1].dimension() == 64);
    CHECK(e.embed_one("same text") == e.embed_one("same text"));
    CHECK(e.embed_one("   ").dimension() == 64);

    auto inner = std::make_shared<HashEmbedder>(64);
    EmbedClient client(inner, nullptr);
    try {
        client.embed({"a", "", "c"});
        FAIL("expected EmptyText");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::EmptyText);
        CHECK(std::string(err.what()).find("index 1") != std::string::npos);
    }
    client.embed({"a", "b"});
    client.embed({"b", "a"});
    CHECK(inner->calls() == 1);
}

TEST_CASE("random choice mock is a uniform letter") {
    RandomChoiceChat chat(3);
    std::map<std::string, int> counts;
    for (int i = 0; i < 400; ++i) counts[chat.chat(user_request("q" + std::to_string(i))).content]++;
    CHECK(counts.size() == 4);
    for (auto& [letter, n] : counts) CHECK(n > 60);
}

TEST_CASE("synthetic backend is deterministic per seed") {
    auto req = make_request({}, "judge_CC", {{Role::System, "rubric"}, {Role::User, "dialogue"}});
    SyntheticChat a(7), b(7);
    CHECK(a.chat(req).content == b.chat(req).content);
    auto echo_req = make_request({}, "correct_transcript", {{Role::User, "keep me"}});
    CHECK(a.chat(echo_req).content == "keep me");
}

TEST_CASE("base url splitting") {
    CHECK(split_base_url("https://api.x.com/v1") == std::pair<std::string, std::string>{"https://api.x.com", "/v1"});
    CHECK(split_base_url("http://h:8080") == std::pair<std::string, std::string>{"http://h:8080", ""});
    CHECK(split_base_url("http://h:8080/a/b/") == std::pair<std::string, std::string>{"http://h:8080", "/a/b"});
}

TEST_CASE("http chat backend against a loopback server") {
    FakeApi api;
    HttpChatBackend chat({api.base(), "k123", std::chrono::seconds(5)});
    auto req = user_request("hello");
    req.seed = 7;
    req.max_output_tokens = 20;
    auto resp = chat.chat(req);
    CHECK(resp.content == "re: hello");
    CHECK(resp.usage.prompt_tokens == 5);
    CHECK(resp.usage.output_tokens == 3);
    CHECK(api.last_auth == "Bearer k123");
    CHECK(api.last_body["seed"] == 7);
    CHECK(api.last_body["max_tokens"] == 20);
    CHECK_FALSE(api.last_body.contains("task"));
    CHECK(chat.chat(user_request("long")).finish_reason == FinishReason::Truncated);

    api.chat_failures = 1;
    auto backend = std::make_shared<HttpChatBackend>(HttpEndpoint{api.base(), "", std::chrono::seconds(5)});
    ChatClient client(backend, nullptr, {}, recording_sleeper());
    CHECK(client.chat(user_request("retry")).content == "re: retry");
    CHECK(client.backend_calls() == 2);

    HttpChatBackend unauthorized({api.base("/v1/bad"), "", std::chrono::seconds(5)});
    try {
        unauthorized.chat(user_request("x"));
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status() == 401);
        CHECK_FALSE(e.retryable());
    }
}

TEST_CASE("http embed backend honors row indexes") {
    FakeApi api;
    HttpEmbedBackend embed({api.base(), "", std::chrono::seconds(5)}, "m", 3);
    auto v = embed.embed({"a", "bbb", "cc"});
    REQUIRE(v.size() == 3);
    CHECK(v[0].values[0] == 1.0);
    CHECK(v[1].values[0] == 3.0);
    CHECK(v[2].values[0] == 2.0);
}

TEST_CASE("unreachable backend is a transport error") {
    HttpChatBackend chat({"http://127.0.0.1:1", "", std::chrono::seconds(1)});
    try {
        chat.chat(user_request("x"));
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status() == 0);
        CHECK(e.retryable());
    }
}
