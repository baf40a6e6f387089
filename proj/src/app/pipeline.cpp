#include "app/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <regex>

#include <spdlog/spdlog.h>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "common/text.hpp"
#include "corpus/scrub.hpp"
#include "persona/server.hpp"
#include "provider/http_backend.hpp"
#include "provider/mocks.hpp"
#include "provider/synthetic_backend.hpp"
#include "retrieval/chunker.hpp"
#include "retrieval/index.hpp"
#include "synthesis/synthesis.hpp"

namespace forge::app {

namespace fs = std::filesystem;
using persona::ServeMode;

namespace {

constexpr std::array<ServeMode, 3> kAllModes = {ServeMode::ProfileOnly, ServeMode::ProfileRag, ServeMode::LongContext};

std::vector<Json> rows_of(const fs::path& path) {
    std::vector<Json> out;
    for (auto& row : read_jsonl(path)) out.push_back(std::move(row.value));
    return out;
}

template <class T, class Fn>
std::vector<Json> to_rows(const std::vector<T>& items, Fn&& fn) {
    std::vector<Json> out;
    out.reserve(items.size());
    for (const auto& i : items) out.push_back(fn(i));
    return out;
}

std::string mode_str(ServeMode m) { return std::string(persona::mode_name(m)); }

}  // namespace

void validate_persona_id(const std::string& persona) {
    static const std::regex ok(R"([A-Za-z0-9][A-Za-z0-9_.-]{0,63})");
    require(std::regex_match(persona, ok) && persona.find("..") == std::string::npos, Errc::Usage,
            "invalid persona id '" + persona + "'");
}

Workspace::Workspace(RunOptions options)
    : config_(load_config(options.workspace, options.config_path)),
      mock_(options.mock),
      tokenizer_(std::make_shared<retrieval::DefaultTokenizer>()) {
    if (options.seed) config_.seed = *options.seed;
    for (const auto& w : config_.warnings) spdlog::warn("{}", w);
    pool_ = WorkerPool(static_cast<std::size_t>(config_.pipeline.workers));
    cache_ = std::make_shared<provider::ResponseCache>(config_.cache_dir);
}

fs::path Workspace::raw_dir(const std::string& persona) const {
    validate_persona_id(persona);
    return config_.root / "raw" / persona;
}

fs::path Workspace::artifact_dir(const std::string& persona) const {
    validate_persona_id(persona);
    return config_.root / "artifacts" / persona;
}

fs::path Workspace::artifact(const std::string& persona, const std::string& name) const {
    return artifact_dir(persona) / name;
}

std::string Workspace::rel(const fs::path& p) const {
    const auto r = p.lexically_relative(config_.root);
    if (r.empty() || *r.begin() == "..") return p.string();
    return r.generic_string();
}

provider::ModelSettings Workspace::synth_model() const {
    provider::ModelSettings m;
    m.model_id = config_.backend.chat_model;
    m.temperature = config_.backend.synth_temperature;
    m.seed = static_cast<std::int64_t>(config_.seed & 0x7fffffffffffffffULL);
    return m;
}

provider::ModelSettings Workspace::judge_model() const {
    auto m = synth_model();
    if (!config_.backend.judge_model.empty()) m.model_id = config_.backend.judge_model;
    m.temperature = 0.0;
    return m;
}

provider::ModelSettings Workspace::persona_model() const { return synth_model(); }

std::shared_ptr<provider::ChatPort> Workspace::chat() {
    std::lock_guard lock(provider_mu_);
    if (chat_) return chat_;
    std::shared_ptr<provider::ChatPort> backend;
    if (mock_) {
        backend = std::make_shared<provider::SyntheticChat>(config_.seed);
    } else {
        const auto& b = config_.backend;
        const auto key = process_env(b.api_key_env);
        require(key.has_value() && !key->empty(), Errc::ConfigInvalid,
                "backend.api_key_env: environment variable " + b.api_key_env + " is not set (or use --mock)");
        backend = std::make_shared<provider::HttpChatBackend>(
            provider::HttpEndpoint{b.base_url, *key, std::chrono::seconds(b.timeout_s)});
    }
    provider::RetryPolicy policy;
    policy.max_retries = static_cast<int>(config_.backend.max_retries);
    chat_ = std::make_shared<provider::ChatClient>(backend, cache_, policy);
    return chat_;
}

std::shared_ptr<provider::EmbedPort> Workspace::embedder() {
    std::lock_guard lock(provider_mu_);
    if (embed_) return embed_;
    std::shared_ptr<provider::EmbedPort> backend;
    if (mock_) {
        backend = std::make_shared<provider::HashEmbedder>(64);
    } else {
        const auto& b = config_.backend;
        const auto key = process_env(b.api_key_env);
        require(key.has_value() && !key->empty(), Errc::ConfigInvalid,
                "backend.api_key_env: environment variable " + b.api_key_env + " is not set (or use --mock)");
        backend = std::make_shared<provider::HttpEmbedBackend>(
            provider::HttpEndpoint{b.base_url, *key, std::chrono::seconds(b.timeout_s)}, b.embed_model,
            static_cast<std::size_t>(b.embed_dim));
    }
    provider::RetryPolicy policy;
    policy.max_retries = static_cast<int>(config_.backend.max_retries);
    embed_ = std::make_shared<provider::EmbedClient>(backend, cache_, policy);
    return embed_;
}

fs::path Workspace::require_input(const std::string& persona, const std::string& name, const std::string& stage) const {
    const auto path = artifact(persona, name);
    require(fs::exists(path), Errc::MissingUpstreamArtifact,
            stage + ": " + rel(path) + " not found; run 'forge " + stage + " --persona " + persona + "' first");
    const auto sidecar = fs::path(path.string() + ".run.json");
    if (fs::exists(sidecar)) {
        const auto meta = Json::parse(read_text_file(sidecar), nullptr, false);
        if (meta.is_object() && meta.contains("inputs")) {
            for (const auto& [input, digest] : meta["inputs"].items()) {
                const fs::path p = fs::path(input).is_absolute() ? fs::path(input) : config_.root / input;
                if (!fs::exists(p) || file_sha256(p) != digest.get<std::string>())
                    spdlog::warn("{} is stale: {} changed since it was built; rerun '{}'", rel(path), input,
                                 meta.value("stage", stage));
            }
        }
    }
    return path;
}

void Workspace::write_stage(const std::string& persona, const std::string& stage, const std::vector<fs::path>& inputs,
                            const std::vector<Output>& outputs) const {
    Json input_digests = Json::object();
    for (const auto& in : inputs) input_digests[rel(in)] = file_sha256(in);
    const auto manifest_rel = "manifests/" + stage + ".json";
    Json output_digests = Json::object();
    for (const auto& out : outputs) {
        const auto path = artifact(persona, out.name);
        write_file_atomic(path, out.content);
        output_digests[out.name] = sha256_hex(out.content);
        const Json sidecar{{"stage", stage.substr(0, stage.find('.'))},
                           {"manifest", manifest_rel},
                           {"inputs", input_digests}};
        write_file_atomic(path.string() + ".run.json", sidecar.dump(2) + "\n");
    }
    const Json manifest{{"stage", stage},
                        {"persona_id", persona},
                        {"config_hash", config_.hash()},
                        {"seed", config_.seed},
                        {"mock", mock_},
                        {"inputs", input_digests},
                        {"outputs", output_digests}};
    write_file_atomic(artifact(persona, manifest_rel), manifest.dump(2) + "\n");
}

corpus::CorpusBundle Workspace::load_cleaned(const std::string& persona) const {
    const auto path = require_input(persona, "cleaned.json", "clean");
    const auto j = Json::parse(read_text_file(path), nullptr, false);
    require(!j.is_discarded(), Errc::MalformedRecord, rel(path) + ": not valid JSON");
    return corpus::bundle_from_json(j);
}

Json Workspace::ingest(const std::string& persona) {
    const auto dir = raw_dir(persona);
    auto bundle = corpus::ingest_corpus(dir, persona, *tokenizer_);
    std::vector<fs::path> inputs;
    for (const char* f : {"profile.json", "transcripts.jsonl", "comments.jsonl"})
        if (fs::exists(dir / f)) inputs.push_back(dir / f);
    write_stage(persona, "ingest", inputs, {{"bundle.json", to_json(bundle).dump(2) + "\n"}});
    std::size_t tokens = 0;
    for (const auto& t : bundle.transcripts) tokens += t.token_count;
    return {{"stage", "ingest"}, {"persona_id", persona}, {"transcripts", bundle.transcripts.size()},
            {"comments", bundle.comments.size()}, {"tokens", tokens}};
}

Json Workspace::clean(const std::string& persona) {
    const auto in = require_input(persona, "bundle.json", "ingest");
    const auto j = Json::parse(read_text_file(in), nullptr, false);
    require(!j.is_discarded(), Errc::MalformedRecord, rel(in) + ": not valid JSON");
    auto bundle = corpus::bundle_from_json(j);
    auto model = synth_model();
    model.temperature = 0.0;
    auto cleaned =
        corpus::clean_bundle(bundle, *chat(), *tokenizer_, corpus::ScrubRuleSet::defaults(), model, pool_);
    write_stage(persona, "clean", {in}, {{"cleaned.json", to_json(cleaned).dump(2) + "\n"}});
    return {{"stage", "clean"}, {"persona_id", persona}, {"transcripts", cleaned.transcripts.size()}};
}

Json Workspace::synth(const std::string& persona, std::optional<int> pairs_per_opinion) {
    const auto bundle = load_cleaned(persona);
    const int pairs = pairs_per_opinion.value_or(static_cast<int>(config_.pipeline.pairs_per_opinion));
    require(pairs >= 1, Errc::Usage, "pairs per opinion must be >= 1");
    auto port = chat();
    const auto model = synth_model();
    struct PerVideo {
        std::vector<synthesis::MetaOpinion> opinions;
        std::vector<synthesis::DialoguePair> pairs;
    };
    auto results = pool_.map<PerVideo>(bundle.transcripts.size(), [&](std::size_t i) {
        PerVideo out;
        out.opinions = synthesis::extract_meta_opinions(bundle.transcripts[i], *port, model);
        for (const auto& op : out.opinions) {
            auto ps = synthesis::synth_dialogues(op, *port, pairs, model);
            out.pairs.insert(out.pairs.end(), ps.begin(), ps.end());
        }
        return out;
    });
    std::vector<Json> opinion_rows, pair_rows;
    for (const auto& r : results) {
        for (const auto& o : r.opinions) opinion_rows.push_back(synthesis::to_json(o));
        for (const auto& p : r.pairs) pair_rows.push_back(synthesis::to_json(p));
    }
    write_stage(persona, "synth", {artifact(persona, "cleaned.json")},
                {{"opinions.jsonl", to_jsonl(opinion_rows)}, {"dialogues.jsonl", to_jsonl(pair_rows)}});
    return {{"stage", "synth"}, {"persona_id", persona}, {"opinions", opinion_rows.size()},
            {"pairs", pair_rows.size()}};
}

Json Workspace::filter(const std::string& persona) {
    const auto in = require_input(persona, "dialogues.jsonl", "synth");
    std::vector<synthesis::DialoguePair> pairs;
    for (const auto& row : rows_of(in)) pairs.push_back(synthesis::pair_from_json(row));
    auto port = chat();
    const auto answer = synth_model();
    const auto judge = judge_model();
    auto flagged = pool_.map<synthesis::DialoguePair>(pairs.size(), [&](std::size_t i) {
        return synthesis::flag_counter_intuitive(pairs[i], *port, answer, judge);
    });
    const auto n_flagged = std::count_if(flagged.begin(), flagged.end(),
                                         [](const auto& p) { return p.counter_intuitive.value_or(false); });
    write_stage(persona, "filter", {in},
                {{"dialogues.filtered.jsonl",
                  to_jsonl(to_rows(flagged, [](const auto& p) { return synthesis::to_json(p); }))}});
    return {{"stage", "filter"}, {"persona_id", persona}, {"pairs", flagged.size()},
            {"counter_intuitive", n_flagged}};
}

Json Workspace::build_train(const std::string& persona) {
    const auto pairs_path = require_input(persona, "dialogues.filtered.jsonl", "filter");
    const auto opinions_path = require_input(persona, "opinions.jsonl", "synth");
    std::vector<synthesis::DialoguePair> pairs;
    for (const auto& row : rows_of(pairs_path)) pairs.push_back(synthesis::pair_from_json(row));
    std::vector<synthesis::MetaOpinion> opinions;
    for (const auto& row : rows_of(opinions_path)) opinions.push_back(synthesis::opinion_from_json(row));
    const auto examples = synthesis::build_training_set(pairs, synthesis::make_lookup(opinions));
    const auto body = synthesis::render_training(examples);
    const auto followups = std::count_if(examples.begin(), examples.end(), [](const auto& e) {
        return e.source_kind == synthesis::SourceKind::CounterintuitiveFollowup;
    });
    write_stage(persona, "build-train", {pairs_path, opinions_path}, {{"train." + persona + ".jsonl", body}});
    return {{"stage", "build-train"}, {"persona_id", persona}, {"examples", examples.size()},
            {"followups", followups}, {"bytes", body.size()}};
}

Json Workspace::index(const std::string& persona, std::optional<std::size_t> max_tokens) {
    const auto bundle = load_cleaned(persona);
    const auto budget = max_tokens.value_or(static_cast<std::size_t>(config_.pipeline.max_tokens));
    require(budget >= 1, Errc::Usage, "max tokens must be >= 1");
    std::vector<retrieval::SourceText> sources;
    for (const auto& t : bundle.transcripts) sources.push_back({t.video_id, t.text()});
    auto chunks = retrieval::chunk_text(persona, sources, *tokenizer_, budget);
    const auto idx = retrieval::build_index(persona, std::move(chunks), *embedder(), *tokenizer_, pool_);
    write_stage(persona, "index", {artifact(persona, "cleaned.json")},
                {{"index." + persona + ".json", idx.to_json().dump() + "\n"}});
    return {{"stage", "index"}, {"persona_id", persona}, {"chunks", idx.size()}, {"dimension", idx.dimension()},
            {"max_tokens", budget}};
}

Json Workspace::search(const std::string& persona, const std::string& query, std::optional<std::size_t> k) {
    const auto path = require_input(persona, "index." + persona + ".json", "index");
    const auto idx = retrieval::KnowledgeIndex::load(path, *tokenizer_);
    const auto hits =
        retrieval::search(idx, query, k.value_or(static_cast<std::size_t>(config_.pipeline.top_k)), *embedder());
    Json out = Json::array();
    for (const auto& h : hits)
        out.push_back({{"chunk_id", h.chunk.chunk_id}, {"video_id", h.chunk.video_id}, {"score", h.score},
                       {"text", h.chunk.text}});
    return out;
}

std::shared_ptr<const persona::PersonaAgent> Workspace::make_agent(const std::string& persona, ServeMode mode) {
    const auto bundle = load_cleaned(persona);
    persona::AgentConfig cfg;
    cfg.model = persona_model();
    cfg.top_k = static_cast<std::size_t>(config_.pipeline.top_k);
    cfg.context_budget_tokens = static_cast<std::size_t>(config_.pipeline.context_budget_tokens);
    std::shared_ptr<const retrieval::KnowledgeIndex> idx;
    std::shared_ptr<provider::EmbedPort> emb;
    std::string full;
    if (mode == ServeMode::ProfileRag) {
        const auto path = require_input(persona, "index." + persona + ".json", "index");
        idx = std::make_shared<retrieval::KnowledgeIndex>(retrieval::KnowledgeIndex::load(path, *tokenizer_));
        emb = embedder();
    } else if (mode == ServeMode::LongContext) {
        std::vector<retrieval::SourceText> sources;
        for (const auto& t : bundle.transcripts) sources.push_back({t.video_id, t.text()});
        full = retrieval::normalized_corpus(sources, *tokenizer_);
    }
    auto agent = std::make_shared<persona::PersonaAgent>(bundle.persona, cfg, chat(), emb, idx, full, tokenizer_);
    agent->check_mode(mode);
    return agent;
}

std::shared_ptr<persona::SessionStore> Workspace::make_store(const std::vector<std::string>& personas,
                                                             ServeMode mode) {
    require(!personas.empty(), Errc::Usage, "no persona to serve");
    std::map<std::string, std::shared_ptr<const persona::PersonaAgent>> agents;
    for (const auto& p : personas) agents[p] = make_agent(p, mode);
    return std::make_shared<persona::SessionStore>(std::move(agents));
}

Json Workspace::eval_mcq(const std::string& persona, std::optional<evalkit::McqDimension> dimension, ServeMode mode,
                         bool full) {
    const auto agent = make_agent(persona, mode);
    const auto bundle = load_cleaned(persona);
    require(!bundle.transcripts.empty(), Errc::EmptyCorpus, "persona '" + persona + "' has no transcripts");
    const auto budget =
        static_cast<std::size_t>(full ? config_.pipeline.mcq_count_full : config_.pipeline.mcq_count);

    struct Task {
        evalkit::McqDimension dim;
        std::size_t transcript;
        std::size_t count;
    };
    std::vector<Task> tasks;
    const auto n_t = bundle.transcripts.size();
    for (auto dim : {evalkit::McqDimension::Knowledge, evalkit::McqDimension::Tone})
        for (std::size_t i = 0; i < n_t; ++i)
            if (const auto c = budget / n_t + (i < budget % n_t ? 1 : 0); c > 0) tasks.push_back({dim, i, c});

    auto port = chat();
    const auto model = synth_model();
    auto batches = pool_.map<evalkit::McqBatch>(tasks.size(), [&](std::size_t i) {
        return evalkit::gen_mcq(bundle.transcripts[tasks[i].transcript], tasks[i].dim, *port, tasks[i].count, model);
    });
    std::vector<evalkit::McqItem> items;
    std::size_t dropped = 0;
    for (auto& b : batches) {
        dropped += b.dropped;
        items.insert(items.end(), b.items.begin(), b.items.end());
    }

    const auto cleaned_path = artifact(persona, "cleaned.json");
    const auto mcq_name = "mcq." + persona + ".jsonl";
    std::vector<Output> outputs{{mcq_name, to_jsonl(to_rows(items, [](const auto& m) { return evalkit::to_json(m); }))}};
    Json summary{{"stage", "eval-mcq"}, {"persona_id", persona}, {"mode", mode_str(mode)},
                 {"items", items.size()}, {"dropped", dropped}};
    for (auto dim : {evalkit::McqDimension::Knowledge, evalkit::McqDimension::Tone}) {
        if (dimension && *dimension != dim) continue;
        std::vector<evalkit::McqItem> subset;
        std::copy_if(items.begin(), items.end(), std::back_inserter(subset),
                     [&](const auto& m) { return m.dimension == dim; });
        evalkit::PersonaAnswerer answerer(agent, mode);
        const auto grade = evalkit::grade_mcq(subset, answerer, pool_);
        auto doc = evalkit::to_json(grade);
        const std::string dim_name(evalkit::mcq_dimension_name(dim));
        doc["persona_id"] = persona;
        doc["mode"] = mode_str(mode);
        doc["dimension"] = dim_name;
        outputs.push_back({"grades." + persona + "." + mode_str(mode) + "." + dim_name + ".json", doc.dump(2) + "\n"});
        summary[dim_name + "_acc"] = grade.accuracy;
        summary[dim_name + "_parse_failures"] = grade.parse_failures;
    }
    std::vector<fs::path> inputs{cleaned_path};
    if (mode == ServeMode::ProfileRag) inputs.push_back(artifact(persona, "index." + persona + ".json"));
    write_stage(persona, "eval-mcq." + mode_str(mode), inputs, outputs);
    return summary;
}

Json Workspace::eval_fan(const std::string& persona, std::optional<evalkit::FanType> fan_type, ServeMode mode,
                         std::optional<std::size_t> sessions, std::optional<std::string> persona_url) {
    const auto bundle = load_cleaned(persona);
    require(!bundle.transcripts.empty(), Errc::EmptyCorpus, "persona '" + persona + "' has no transcripts");
    std::shared_ptr<const persona::PersonaAgent> agent;
    if (!persona_url) agent = make_agent(persona, mode);
    const auto n = sessions.value_or(static_cast<std::size_t>(config_.pipeline.sessions_per_fan_type));
    require(n >= 1, Errc::Usage, "sessions must be >= 1");
    const int rounds = static_cast<int>(config_.pipeline.rounds);

    std::vector<evalkit::FanType> types;
    if (fan_type) types.push_back(*fan_type);
    else types = {evalkit::FanType::New, evalkit::FanType::Old};
    if (std::find(types.begin(), types.end(), evalkit::FanType::Old) != types.end())
        require(!bundle.comments.empty(), Errc::NoComments, "persona '" + persona + "' has no comments for old fans");

    auto port = chat();
    const auto fan_settings = synth_model();
    const auto judge_settings = judge_model();
    struct Result {
        evalkit::InteractionSession session;
        evalkit::JudgedSession judged;
    };
    const std::size_t total = types.size() * n;
    auto results = pool_.map<Result>(total, [&](std::size_t t) {
        const auto type = types[t / n];
        const auto i = t % n;
        char id[128];
        std::snprintf(id, sizeof id, "%s-%s-%s-%03zu", persona.c_str(), std::string(evalkit::fan_type_name(type)).c_str(),
                      mode_str(mode).c_str(), i + 1);

        std::vector<corpus::Comment> sample;
        if (type == evalkit::FanType::Old) {
            constexpr std::size_t kCommentsPerProfile = 8;
            std::vector<std::size_t> order(bundle.comments.size());
            std::iota(order.begin(), order.end(), 0);
            const auto key = stable_hash(id, config_.seed);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::pair(mix64(key ^ a), a) < std::pair(mix64(key ^ b), b);
            });
            order.resize(std::min(order.size(), kCommentsPerProfile));
            std::sort(order.begin(), order.end());
            for (auto k : order) sample.push_back(bundle.comments[k]);
        }
        const auto fan = evalkit::synth_fan_profile(bundle.persona, sample, type, *port, fan_settings,
                                                    static_cast<int>(i + 1));
        const auto& video = bundle.transcripts[(i + config_.seed) % bundle.transcripts.size()];

        std::unique_ptr<persona::PersonaEndpoint> endpoint;
        if (persona_url) endpoint = std::make_unique<persona::HttpPersonaEndpoint>(*persona_url, persona, mode);
        else endpoint = std::make_unique<persona::LocalPersonaEndpoint>(agent, mode, id);

        Result r;
        r.session = evalkit::simulate_interaction(fan, *endpoint, video, *port, id, fan_settings, rounds);
        r.session.mode = mode_str(mode);
        r.judged.session_id = id;
        r.judged.persona_id = persona;
        r.judged.mode = mode_str(mode);
        r.judged.fan_type = type;
        r.judged.scores = evalkit::judge_session(r.session, *port, judge_settings, rounds);
        return r;
    });

    std::vector<Json> session_rows, score_rows;
    std::vector<evalkit::JudgedSession> judged;
    for (const auto& r : results) {
        session_rows.push_back(evalkit::to_json(r.session));
        score_rows.push_back(evalkit::to_json(r.judged));
        judged.push_back(r.judged);
    }
    std::vector<fs::path> inputs{artifact(persona, "cleaned.json")};
    if (mode == ServeMode::ProfileRag && !persona_url) inputs.push_back(artifact(persona, "index." + persona + ".json"));
    write_stage(persona, "eval-fan." + mode_str(mode), inputs,
                {{"sessions." + persona + "." + mode_str(mode) + ".jsonl", to_jsonl(session_rows)},
                 {"scores." + persona + "." + mode_str(mode) + ".jsonl", to_jsonl(score_rows)}});
    auto summary = stats::to_json(stats::aggregate(persona, mode_str(mode), judged));
    summary["stage"] = "eval-fan";
    summary["sessions"] = judged.size();
    return summary;
}

std::string Workspace::report(const std::string& persona, stats::ReportFormat format) {
    std::vector<stats::EvalReport> reports;
    std::vector<fs::path> inputs;
    for (const auto mode : kAllModes) {
        stats::Accuracies acc;
        bool any = false;
        for (auto dim : {evalkit::McqDimension::Knowledge, evalkit::McqDimension::Tone}) {
            const auto path = artifact(persona, "grades." + persona + "." + mode_str(mode) + "." +
                                                    std::string(evalkit::mcq_dimension_name(dim)) + ".json");
            if (!fs::exists(path)) continue;
            require_input(persona, path.filename().string(), "eval-mcq");
            const auto doc = Json::parse(read_text_file(path), nullptr, false);
            require(doc.is_object() && doc.contains("accuracy"), Errc::MalformedRecord, rel(path) + ": no accuracy");
            (dim == evalkit::McqDimension::Knowledge ? acc.knowledge : acc.tone) = doc["accuracy"].get<double>();
            inputs.push_back(path);
            any = true;
        }
        std::vector<evalkit::JudgedSession> judged;
        const auto scores_path = artifact(persona, "scores." + persona + "." + mode_str(mode) + ".jsonl");
        if (fs::exists(scores_path)) {
            require_input(persona, scores_path.filename().string(), "eval-fan");
            for (const auto& row : rows_of(scores_path)) judged.push_back(evalkit::judged_from_json(row));
            inputs.push_back(scores_path);
            any = true;
        }
        if (any) reports.push_back(stats::aggregate(persona, mode_str(mode), judged, acc));
    }
    require(!reports.empty(), Errc::MissingUpstreamArtifact,
            "eval-mcq: no evaluation results for '" + persona + "'; run 'forge eval-mcq' or 'forge eval-fan' first");
    std::vector<Output> outputs;
    for (auto f : {stats::ReportFormat::TableText, stats::ReportFormat::Json, stats::ReportFormat::Csv})
        outputs.push_back({"report." + persona + "." + std::string(stats::report_format_extension(f)),
                           stats::emit_report(reports, f)});
    write_stage(persona, "report", inputs, outputs);
    return stats::emit_report(reports, format);
}

Json Workspace::correlate(const std::string& persona, const fs::path& human_csv, ServeMode mode,
                          stats::CorrelationUnit unit) {
    const auto scores_path =
        require_input(persona, "scores." + persona + "." + mode_str(mode) + ".jsonl", "eval-fan");
    std::vector<evalkit::JudgedSession> judged;
    for (const auto& row : rows_of(scores_path)) judged.push_back(evalkit::judged_from_json(row));
    const auto humans = stats::parse_human_csv(read_text_file(human_csv));
    const auto results = stats::correlate_with_humans(judged, humans, unit);
    Json out{{"persona_id", persona},
             {"mode", mode_str(mode)},
             {"unit", unit == stats::CorrelationUnit::Item ? "item" : "session"},
             {"by_fan_type", stats::to_json(results)}};
    write_stage(persona, "correlate." + mode_str(mode), {scores_path, human_csv},
                {{"correlation." + persona + "." + mode_str(mode) + ".json", out.dump(2) + "\n"}});
    return out;
}

}  // namespace forge::app
