#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common/json_io.hpp"
#include "evalkit/fan.hpp"
#include "stats/correlation.hpp"

namespace forge::stats {

using evalkit::FanType;

struct FanMeans {
    std::array<double, 3> means{};  // in dimensions_for(fan_type) order
    std::size_t session_count = 0;

    // Sum of the three means; derived, never stored.
    double all() const noexcept { return means[0] + means[1] + means[2]; }
};

struct EvalReport {
    std::string persona_id;
    std::string mode;
    std::optional<double> knowledge_acc;
    std::optional<double> tone_acc;
    std::optional<FanMeans> new_fan;
    std::optional<FanMeans> old_fan;
};

struct Accuracies {
    std::optional<double> knowledge;
    std::optional<double> tone;
};

// Per-dimension means over sessions. Every session must carry exactly the
// dimension triple of its fan type (IncompleteSession otherwise).
EvalReport aggregate(const std::string& persona_id, const std::string& mode,
                     const std::vector<evalkit::JudgedSession>& sessions, const Accuracies& acc = {});

Json to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);

enum class ReportFormat { TableText, Json, Csv };

ReportFormat parse_report_format(std::string_view s);
std::string_view report_format_extension(ReportFormat f) noexcept;

inline constexpr std::array<std::string_view, 12> kCsvColumns = {
    "persona_id", "mode", "Know", "Tone", "CC", "IA", "EA", "ALL_new", "FR", "CR", "CA", "ALL_old"};

// One row per report (typically one per serve mode). Absent cells are empty.
std::string emit_report(const std::vector<EvalReport>& reports, ReportFormat format);

struct HumanScore {
    std::string session_id;
    evalkit::Dimension dimension = evalkit::Dimension::CC;
    double score = 0;
    std::string annotator_id;
};

// CSV with the header session_id,dimension,score,annotator_id.
std::vector<HumanScore> parse_human_csv(const std::string& text);

enum class CorrelationUnit { Item, Session };

CorrelationUnit parse_correlation_unit(std::string_view s);

// Scores from several annotators of one (session, dimension) are averaged
// before joining. Item unit pairs per (session, dimension); session unit
// pairs the per-session sums. Keys present on only one side raise
// JoinMismatch listing them.
std::map<FanType, CorrelationResult> correlate_with_humans(const std::vector<evalkit::JudgedSession>& machine,
                                                           const std::vector<HumanScore>& humans,
                                                           CorrelationUnit unit = CorrelationUnit::Item);

Json to_json(const std::map<FanType, CorrelationResult>& results);

}  // namespace forge::stats
