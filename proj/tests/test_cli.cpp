#include <doctest.h>

#include <json.hpp>

#include "proc.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using forge::test::run;
using forge::test::shell_quote;

namespace {

struct Cli {
    forge::test::TempDir dir;
    std::string ws;

    Cli() {
        fs::copy(fs::path(FORGE_FIXTURE_DIR) / "workspace", dir / "ws", fs::copy_options::recursive);
        ws = (dir / "ws").string();
    }
    forge::test::ProcResult operator()(const std::string& args) const {
        return run(std::string(FORGE_CLI_PATH) + " -w " + shell_quote(ws) + " --mock -q " + args);
    }
};

}  // namespace

TEST_CASE("usage errors exit 2") {
    auto none = run(FORGE_CLI_PATH);
    CHECK(none.exit_code == 2);

    auto unknown = run(std::string(FORGE_CLI_PATH) + " frobnicate");
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.output.find("frobnicate") != std::string::npos);
    CHECK(unknown.output.find("ingest") != std::string::npos);

    Cli cli;
    CHECK(cli("ingest").exit_code == 2);  // no --persona
    CHECK(cli("-p demo_chef eval-mcq --mode sideways").exit_code == 2);
    CHECK(run(std::string(FORGE_CLI_PATH) + " --help").exit_code == 0);
}

TEST_CASE("missing upstream artifact names the stage") {
    Cli cli;
    REQUIRE(cli("-p demo_chef ingest").exit_code == 0);
    REQUIRE(cli("-p demo_chef clean").exit_code == 0);
    auto r = cli("-p demo_chef eval-mcq --mode profile_rag");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("MissingUpstreamArtifact") != std::string::npos);
    CHECK(r.output.find("forge index") != std::string::npos);
}

TEST_CASE("invalid config exits 2") {
    Cli cli;
    forge::test::write(fs::path(cli.ws) / "forge.toml", "[pipeline]\nworkers = 0\n");
    auto r = cli("-p demo_chef ingest");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("pipeline.workers") != std::string::npos);
}

TEST_CASE("full mock run through the CLI") {
    Cli cli;
    for (const char* step : {"ingest", "clean", "synth", "filter", "build-train", "index"}) {
        auto r = cli(std::string("-p demo_chef ") + step);
        INFO(step << ": " << r.output);
        REQUIRE(r.exit_code == 0);
    }
    auto search = cli("-p demo_chef --json search 'resting steak' -k 2");
    REQUIRE(search.exit_code == 0);
    CHECK(nlohmann::json::parse(search.output).size() == 2);

    REQUIRE(cli("-p demo_chef eval-mcq --mode profile_only").exit_code == 0);
    REQUIRE(cli("-p demo_chef eval-mcq --mode profile_rag --dimension knowledge").exit_code == 0);
    REQUIRE(cli("-p demo_chef eval-fan --mode profile_rag --sessions 2").exit_code == 0);

    auto report = cli("-p demo_chef report --format table_text");
    REQUIRE(report.exit_code == 0);
    CHECK(report.output.find("profile_only") != std::string::npos);
    CHECK(report.output.find("profile_rag") != std::string::npos);

    auto csv = cli("-p demo_chef report --format csv");
    CHECK(csv.output.rfind("persona_id,mode,Know,Tone,CC,IA,EA,ALL_new,FR,CR,CA,ALL_old", 0) == 0);

    auto chat = run("printf 'hello chef\\n/history\\n/quit\\n' | " + std::string(FORGE_CLI_PATH) + " -w " +
                    shell_quote(cli.ws) + " --mock -q -p demo_chef chat --mode profile_only");
    CHECK(chat.exit_code == 0);
    CHECK(chat.output.find("hello chef") != std::string::npos);
}
