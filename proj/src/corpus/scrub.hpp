#pragma once

#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace forge::corpus {

inline constexpr std::string_view kRedactionMarker = "[REDACTED]";

struct ScrubRule {
    std::string name;
    std::string pattern;
    std::regex regex;
};

class ScrubRuleSet {
public:
    // URLs with user paths, e-mail addresses, phone numbers and @-handles.
    static ScrubRuleSet defaults();

    // Throws Error(ConfigInvalid) for a pattern std::regex rejects, or for one
    // that matches the redaction marker itself.
    void add(std::string name, std::string pattern);

    const std::vector<ScrubRule>& rules() const noexcept { return rules_; }

private:
    std::vector<ScrubRule> rules_;
};

// Replaces every match of every rule with the redaction marker, repeating
// until nothing matches, so scrub(scrub(x)) == scrub(x).
std::string scrub_private(std::string_view text, const ScrubRuleSet& rules);

bool has_private_match(std::string_view text, const ScrubRuleSet& rules);

}  // namespace forge::corpus
