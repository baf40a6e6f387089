#pragma once

#include <array>
#include <string>
#include <string_view>

namespace forge::evalkit {

enum class FanType { New, Old };

enum class Dimension { CC, IA, EA, FR, CR, CA };

std::string_view fan_type_name(FanType t) noexcept;
FanType parse_fan_type(std::string_view s);

std::string_view dimension_code(Dimension d) noexcept;
Dimension parse_dimension(std::string_view code);
FanType fan_type_of(Dimension d) noexcept;

// New fans are judged on CC/IA/EA, old fans on FR/CR/CA.
std::array<Dimension, 3> dimensions_for(FanType t) noexcept;

struct RubricEntry {
    Dimension dimension;
    std::string_view name;
    std::string_view definition;
    std::array<std::string_view, 3> anchors;  // scores 1, 2, 3
};

const RubricEntry& rubric(Dimension d) noexcept;

// Judge-prompt block for one dimension: name, definition, all three anchors.
std::string rubric_block(Dimension d);

}  // namespace forge::evalkit
