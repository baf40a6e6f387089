#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "common/json_io.hpp"
#include "corpus/corpus.hpp"
#include "evalkit/rubric.hpp"
#include "persona/agent.hpp"
#include "provider/chat.hpp"

namespace forge::evalkit {

inline constexpr int kInteractionRounds = 5;

inline constexpr std::array<std::string_view, 6> kFanAttributeKeys = {
    "age_range", "interests", "lifestyle", "career_tendencies", "consumption_habits", "language_style"};

struct FanProfile {
    std::string persona_id;
    FanType fan_type = FanType::New;
    std::map<std::string, std::string> attributes;
    std::vector<std::string> source_comment_ids;  // old fans only

    bool operator==(const FanProfile&) const = default;
};

Json to_json(const FanProfile& f);
FanProfile fan_profile_from_json(const Json& j);

// Old fans are drawn from the comments (NoComments when there are none); new
// fans from the persona's field only. Missing keys get one re-prompt.
// A nonzero `variant` asks for a distinct audience member, so repeated
// calls with the same inputs can yield different fans.
FanProfile synth_fan_profile(const corpus::PersonaRecord& persona, const std::vector<corpus::Comment>& comments,
                             FanType fan_type, provider::ChatPort& chat, const provider::ModelSettings& model = {},
                             int variant = 0);

struct Round {
    std::string fan_msg;
    std::string persona_msg;

    bool operator==(const Round&) const = default;
};

struct InteractionSession {
    std::string session_id;
    std::string mode;  // serve mode of the persona under test
    FanProfile fan_profile;
    std::string persona_id;
    std::string grounding_video_id;
    std::vector<Round> rounds;

    bool operator==(const InteractionSession&) const = default;
};

Json to_json(const InteractionSession& s);
InteractionSession session_from_json(const Json& j);

// Short topic line for the fan model: the transcript's opening sentence,
// capped at a few hundred bytes.
std::string video_topic(const corpus::Transcript& t);

// Five causally ordered rounds. The endpoint is opened before anything is
// recorded, so an unreachable persona fails with an empty session.
InteractionSession simulate_interaction(const FanProfile& fan, persona::PersonaEndpoint& persona,
                                        const corpus::Transcript& video, provider::ChatPort& fan_chat,
                                        std::string session_id, const provider::ModelSettings& model = {},
                                        int rounds = kInteractionRounds);

struct RubricScore {
    Dimension dimension = Dimension::CC;
    int score = 0;
    std::string justification;

    bool operator==(const RubricScore&) const = default;
};

Json to_json(const RubricScore& s);
RubricScore score_from_json(const Json& j);

// Accepts {"score": n, "justification": ...} or a reply whose first number is
// the score. Anything outside 1..3 is nullopt.
std::optional<RubricScore> parse_score(std::string_view reply, Dimension d);

std::string render_dialogue(const InteractionSession& s);

// One temperature-0 call per dimension of the session's fan type. Sessions
// with a round count other than `expected_rounds` are IncompleteSession.
std::vector<RubricScore> judge_session(const InteractionSession& s, provider::ChatPort& chat,
                                       provider::ModelSettings model = {}, int expected_rounds = kInteractionRounds);

struct JudgedSession {
    std::string session_id;
    std::string persona_id;
    std::string mode;
    FanType fan_type = FanType::New;
    std::vector<RubricScore> scores;
};

Json to_json(const JudgedSession& j);
JudgedSession judged_from_json(const Json& j);

}  // namespace forge::evalkit
