#include "evalkit/rubric.hpp"

#include "common/errors.hpp"

namespace forge::evalkit {

std::string_view fan_type_name(FanType t) noexcept { return t == FanType::New ? "new" : "old"; }

FanType parse_fan_type(std::string_view s) {
    if (s == "new") return FanType::New;
    if (s == "old") return FanType::Old;
    fail(Errc::Usage, "unknown fan type '" + std::string(s) + "' (expected new or old)");
}

std::string_view dimension_code(Dimension d) noexcept {
    switch (d) {
        case Dimension::CC: return "CC";
        case Dimension::IA: return "IA";
        case Dimension::EA: return "EA";
        case Dimension::FR: return "FR";
        case Dimension::CR: return "CR";
        case Dimension::CA: return "CA";
    }
    return "CC";
}

Dimension parse_dimension(std::string_view code) {
    for (auto d : {Dimension::CC, Dimension::IA, Dimension::EA, Dimension::FR, Dimension::CR, Dimension::CA})
        if (dimension_code(d) == code) return d;
    fail(Errc::MalformedRecord, "unknown rubric dimension '" + std::string(code) + "'");
}

FanType fan_type_of(Dimension d) noexcept {
    return (d == Dimension::CC || d == Dimension::IA || d == Dimension::EA) ? FanType::New : FanType::Old;
}

std::array<Dimension, 3> dimensions_for(FanType t) noexcept {
    if (t == FanType::New) return {Dimension::CC, Dimension::IA, Dimension::EA};
    return {Dimension::FR, Dimension::CR, Dimension::CA};
}

namespace {

// Scoring anchors shown to the judge.
constexpr std::array<RubricEntry, 6> kRubric{{
    {Dimension::CC, "Content Comprehension",
     "Is what the persona says correct, and can a newcomer to the topic follow it?",
     {"Wrong or muddled. A newcomer would come away confused or misinformed.",
      "Mostly right, but explanations skip steps or get dense in places.",
      "Correct and clear. Hard ideas are broken into pieces a newcomer can follow."}},
    {Dimension::IA, "Interaction Attractiveness",
     "How does the persona treat a newcomer: are replies sensible, warm, and attentive to what was asked?",
     {"Cold, canned or off-topic replies. The newcomer is brushed off.",
      "Polite and on-topic but impersonal.",
      "Warm, responsive and attentive. The newcomer feels welcome."}},
    {Dimension::EA, "Engagement Appeal",
     "Does the conversation make a newcomer want to keep talking and come back for more?",
     {"Flat. Nothing invites the newcomer to continue.",
      "Holds attention at times, with few hooks or invitations to go further.",
      "Lively throughout, with natural prompts that would turn a newcomer into a regular."}},
    {Dimension::FR, "Fan Resonance",
     "Does the persona pick up on a long-time follower's feelings and concerns and answer them in a way that "
     "strengthens the bond?",
     {"Misses or ignores what the follower cares about.",
      "Acknowledges the follower's feelings, but only on the surface.",
      "Clearly understands the follower and responds in a way that deepens the connection."}},
    {Dimension::CR, "Content Relevance",
     "Does the persona talk about what a long-time follower actually comes to this creator for?",
     {"Off the follower's interests. The conversation drifts away from them.",
      "Partly on target, with uneven depth.",
      "Squarely on the follower's interests, with depth that keeps them invested."}},
    {Dimension::CA, "Character Authenticity",
     "Does the persona sound and act like the real creator, in wording, opinions and attitude, as a long-time "
     "follower would recognize?",
     {"Does not feel like the creator. Voice, views or manner are off.",
      "Recognizable in places, with noticeable slips out of character.",
      "Unmistakably the creator in voice, views and manner from start to finish."}},
}};

}  // namespace

const RubricEntry& rubric(Dimension d) noexcept { return kRubric[static_cast<std::size_t>(d)]; }

std::string rubric_block(Dimension d) {
    const auto& r = rubric(d);
    std::string out;
    out += std::string(r.name) + " (" + std::string(dimension_code(d)) + "): " + std::string(r.definition) + "\n";
    static constexpr std::string_view kLabels[] = {"Score 1 (Poor)", "Score 2 (Average)", "Score 3 (Excellent)"};
    for (std::size_t i = 0; i < 3; ++i) out += "- " + std::string(kLabels[i]) + ": " + std::string(r.anchors[i]) + "\n";
    return out;
}

}  // namespace forge::evalkit
