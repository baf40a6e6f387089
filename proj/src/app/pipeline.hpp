#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "common/json_io.hpp"
#include "common/worker_pool.hpp"
#include "corpus/corpus.hpp"
#include "evalkit/fan.hpp"
#include "evalkit/mcq.hpp"
#include "persona/agent.hpp"
#include "provider/chat.hpp"
#include "retrieval/tokenizer.hpp"
#include "stats/report.hpp"

namespace forge::app {

struct RunOptions {
    std::filesystem::path workspace = ".";
    std::optional<std::filesystem::path> config_path;
    std::optional<std::uint64_t> seed;  // overrides the config seed
    bool mock = false;
};

// Workspace layout:
//   raw/<persona>/{profile.json,transcripts.jsonl,comments.jsonl}   inputs
//   artifacts/<persona>/...                                         stage outputs
//   artifacts/<persona>/manifests/<stage>.json                      run manifests
// Each artifact has a `<name>.run.json` sidecar naming its manifest and the
// input digests it was built from; a reader warns when those inputs changed.
class Workspace {
public:
    explicit Workspace(RunOptions options);

    const WorkspaceConfig& config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return config_.seed; }
    bool mock() const noexcept { return mock_; }

    std::filesystem::path raw_dir(const std::string& persona) const;
    std::filesystem::path artifact_dir(const std::string& persona) const;
    std::filesystem::path artifact(const std::string& persona, const std::string& name) const;

    Json ingest(const std::string& persona);
    Json clean(const std::string& persona);
    Json synth(const std::string& persona, std::optional<int> pairs_per_opinion = std::nullopt);
    Json filter(const std::string& persona);
    Json build_train(const std::string& persona);
    Json index(const std::string& persona, std::optional<std::size_t> max_tokens = std::nullopt);
    Json search(const std::string& persona, const std::string& query, std::optional<std::size_t> k = std::nullopt);

    // Generates questions for both dimensions, grades the requested ones.
    Json eval_mcq(const std::string& persona, std::optional<evalkit::McqDimension> dimension, persona::ServeMode mode,
                  bool full = false);
    // persona_url: drive a running `forge serve` instead of an in-process agent.
    Json eval_fan(const std::string& persona, std::optional<evalkit::FanType> fan_type, persona::ServeMode mode,
                  std::optional<std::size_t> sessions = std::nullopt,
                  std::optional<std::string> persona_url = std::nullopt);

    // Writes report.<persona>.{txt,json,csv} and returns the requested rendering.
    std::string report(const std::string& persona, stats::ReportFormat format);
    Json correlate(const std::string& persona, const std::filesystem::path& human_csv, persona::ServeMode mode,
                   stats::CorrelationUnit unit);

    std::shared_ptr<const persona::PersonaAgent> make_agent(const std::string& persona, persona::ServeMode mode);
    std::shared_ptr<persona::SessionStore> make_store(const std::vector<std::string>& personas,
                                                      persona::ServeMode mode);

    std::shared_ptr<provider::ChatPort> chat();
    std::shared_ptr<provider::EmbedPort> embedder();
    const retrieval::TokenizerPort& tokenizer() const noexcept { return *tokenizer_; }

    provider::ModelSettings synth_model() const;
    provider::ModelSettings judge_model() const;
    provider::ModelSettings persona_model() const;

private:
    struct Output {
        std::string name;
        std::string content;
    };

    // Path of an upstream artifact; MissingUpstreamArtifact names `stage` when absent.
    std::filesystem::path require_input(const std::string& persona, const std::string& name,
                                        const std::string& stage) const;
    void write_stage(const std::string& persona, const std::string& stage,
                     const std::vector<std::filesystem::path>& inputs, const std::vector<Output>& outputs) const;
    corpus::CorpusBundle load_cleaned(const std::string& persona) const;
    std::string rel(const std::filesystem::path& p) const;

    WorkspaceConfig config_;
    bool mock_;
    WorkerPool pool_;
    std::shared_ptr<const retrieval::TokenizerPort> tokenizer_;
    std::shared_ptr<provider::ResponseCache> cache_;
    std::mutex provider_mu_;
    std::shared_ptr<provider::ChatPort> chat_;
    std::shared_ptr<provider::EmbedPort> embed_;
};

void validate_persona_id(const std::string& persona);

}  // namespace forge::app
