#include "corpus/scrub.hpp"

#include "common/errors.hpp"

namespace forge::corpus {

ScrubRuleSet ScrubRuleSet::defaults() {
    ScrubRuleSet s;
    s.add("user_url", R"(https?://[^\s/]+/(?:@|u/|user/|users/|profile/|people/|space/)[^\s]*)");
    s.add("space_url", R"(https?://space\.[^\s]+)");
    s.add("email", R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})");
    s.add("phone", R"((?:\+\d{1,3}[ -]?)?(?:\(\d{2,4}\)[ -]?)?\d{3,4}[ -]\d{3,4}[ -]\d{4})");
    s.add("mobile", R"(\b1[3-9]\d{9}\b)");
    s.add("handle", R"(@[A-Za-z0-9_][A-Za-z0-9_.]*[A-Za-z0-9_])");
    return s;
}

void ScrubRuleSet::add(std::string name, std::string pattern) {
    std::regex re;
    try {
        re = std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
        fail(Errc::ConfigInvalid, "scrub rule '" + name + "': " + e.what());
    }
    const std::string marker(kRedactionMarker);
    require(!std::regex_search(marker, re), Errc::ConfigInvalid,
            "scrub rule '" + name + "' matches the redaction marker");
    rules_.push_back({std::move(name), std::move(pattern), std::move(re)});
}

std::string scrub_private(std::string_view text, const ScrubRuleSet& rules) {
    std::string cur(text);
    const std::string marker(kRedactionMarker);
    for (int pass = 0; pass < 16; ++pass) {
        std::string next = cur;
        for (const auto& rule : rules.rules()) next = std::regex_replace(next, rule.regex, marker);
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

bool has_private_match(std::string_view text, const ScrubRuleSet& rules) {
    const std::string s(text);
    for (const auto& rule : rules.rules())
        if (std::regex_search(s, rule.regex)) return true;
    return false;
}

}  // namespace forge::corpus
