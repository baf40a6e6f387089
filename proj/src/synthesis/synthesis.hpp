#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "common/json_io.hpp"
#include "corpus/corpus.hpp"
#include "provider/chat.hpp"

namespace forge::synthesis {

// Fixed by the method: every transcript yields exactly ten meta-opinions.
inline constexpr int kMetaOpinionsPerTranscript = 10;

struct MetaOpinion {
    std::string persona_id;
    std::string video_id;
    int group_index = 0;  // 1..10
    std::string statement;
    std::string evidence_span;  // verbatim excerpt of the corrected transcript

    bool operator==(const MetaOpinion&) const = default;
};

using OpinionRef = std::pair<std::string, int>;  // (video_id, group_index)

struct DialoguePair {
    std::string persona_id;
    OpinionRef opinion_ref;
    std::string fan_utterance;
    std::string persona_reply;
    std::optional<bool> counter_intuitive;  // unset until filtered

    bool operator==(const DialoguePair&) const = default;
};

enum class SourceKind { Dialogue, CounterintuitiveFollowup };

struct TrainingExample {
    std::string persona_id;
    SourceKind source_kind = SourceKind::Dialogue;
    std::vector<provider::Message> messages;

    bool operator==(const TrainingExample&) const = default;
};

Json to_json(const MetaOpinion& o);
MetaOpinion opinion_from_json(const Json& j);
Json to_json(const DialoguePair& p);
DialoguePair pair_from_json(const Json& j);
std::string_view source_kind_name(SourceKind k) noexcept;

// Prompt text that callers may override from configuration.
struct SynthesisPrompts {
    std::string extract_instructions;
    std::string dialogue_instructions;
    std::string verdict_instructions;

    static SynthesisPrompts defaults();
};

// Requests ten opinions as structured JSON. Any defect (wrong count,
// unparseable body, evidence not found in the transcript) triggers a
// corrective re-prompt, at most twice; the last defect is then raised.
std::vector<MetaOpinion> extract_meta_opinions(const corpus::Transcript& t, provider::ChatPort& chat,
                                               const provider::ModelSettings& model = {},
                                               const SynthesisPrompts& prompts = SynthesisPrompts::defaults());

std::vector<DialoguePair> synth_dialogues(const MetaOpinion& op, provider::ChatPort& chat, int pairs_per_opinion = 1,
                                          const provider::ModelSettings& model = {},
                                          const SynthesisPrompts& prompts = SynthesisPrompts::defaults());

// Two calls: the model answers the fan directly with no persona context, then
// a temperature-0 verdict compares that answer with the persona's reply.
// The pair is flagged counter-intuitive when the verdict is "inconsistent".
DialoguePair flag_counter_intuitive(const DialoguePair& p, provider::ChatPort& chat,
                                    const provider::ModelSettings& answer_model = {},
                                    const provider::ModelSettings& judge_model = {},
                                    const SynthesisPrompts& prompts = SynthesisPrompts::defaults());

// Strict parse of a verdict reply; case, surrounding quotes and a trailing
// period are tolerated. Throws VerdictParseFailure otherwise.
bool parse_inconsistent_verdict(std::string_view reply);

using OpinionLookup = std::map<OpinionRef, MetaOpinion>;

OpinionLookup make_lookup(const std::vector<MetaOpinion>& opinions);

// One dialogue example per pair plus one follow-up example per flagged pair,
// whose user turn is the opinion statement followed by the fan utterance.
std::vector<TrainingExample> build_training_set(const std::vector<DialoguePair>& pairs,
                                                const OpinionLookup& opinions);

std::string followup_user_content(const MetaOpinion& op, const DialoguePair& p);

enum class ExportFormat { ChatJsonl };

struct ExportSummary {
    std::size_t count = 0;
    std::size_t bytes = 0;
};

Json to_json(const TrainingExample& e);
TrainingExample example_from_json(const Json& j, const std::string& persona_id);

std::string render_training(const std::vector<TrainingExample>& examples);

ExportSummary export_training(const std::vector<TrainingExample>& examples, const std::filesystem::path& path,
                              ExportFormat format = ExportFormat::ChatJsonl);

std::vector<TrainingExample> import_training(const std::filesystem::path& path, const std::string& persona_id);

}  // namespace forge::synthesis
