#include "stats/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::stats {

using evalkit::Dimension;
using evalkit::dimensions_for;

EvalReport aggregate(const std::string& persona_id, const std::string& mode,
                     const std::vector<evalkit::JudgedSession>& sessions, const Accuracies& acc) {
    EvalReport r;
    r.persona_id = persona_id;
    r.mode = mode;
    r.knowledge_acc = acc.knowledge;
    r.tone_acc = acc.tone;

    std::map<FanType, std::array<double, 3>> sums;
    std::map<FanType, std::size_t> counts;
    for (const auto& s : sessions) {
        const auto dims = dimensions_for(s.fan_type);
        std::array<std::optional<int>, 3> found;
        for (const auto& sc : s.scores) {
            auto it = std::find(dims.begin(), dims.end(), sc.dimension);
            require(it != dims.end(), Errc::IncompleteSession,
                    "session '" + s.session_id + "' has foreign dimension " +
                        std::string(evalkit::dimension_code(sc.dimension)));
            auto& slot = found[static_cast<std::size_t>(it - dims.begin())];
            require(!slot.has_value(), Errc::IncompleteSession,
                    "session '" + s.session_id + "' scores " + std::string(evalkit::dimension_code(sc.dimension)) +
                        " twice");
            require(sc.score >= 1 && sc.score <= 3, Errc::IncompleteSession,
                    "session '" + s.session_id + "' has an out-of-range score");
            slot = sc.score;
        }
        auto& sum = sums[s.fan_type];
        for (std::size_t i = 0; i < 3; ++i) {
            require(found[i].has_value(), Errc::IncompleteSession,
                    "session '" + s.session_id + "' is missing " + std::string(evalkit::dimension_code(dims[i])));
            sum[i] += *found[i];
        }
        ++counts[s.fan_type];
    }
    for (const auto& [type, sum] : sums) {
        FanMeans m;
        m.session_count = counts[type];
        for (std::size_t i = 0; i < 3; ++i) m.means[i] = sum[i] / static_cast<double>(m.session_count);
        (type == FanType::New ? r.new_fan : r.old_fan) = m;
    }
    return r;
}

namespace {

Json fan_json(const std::optional<FanMeans>& m, FanType type) {
    if (!m) return nullptr;
    Json out;
    const auto dims = dimensions_for(type);
    for (std::size_t i = 0; i < 3; ++i) out[std::string(evalkit::dimension_code(dims[i]))] = m->means[i];
    out["ALL"] = m->all();
    out["session_count"] = m->session_count;
    return out;
}

std::optional<FanMeans> fan_from_json(const Json& j, FanType type) {
    if (j.is_null()) return std::nullopt;
    FanMeans m;
    const auto dims = dimensions_for(type);
    for (std::size_t i = 0; i < 3; ++i) m.means[i] = j.at(std::string(evalkit::dimension_code(dims[i]))).get<double>();
    m.session_count = j.at("session_count").get<std::size_t>();
    return m;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_from(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::vector<std::string> row_cells(const EvalReport& r, bool percent) {
    auto acc = [&](const std::optional<double>& v) {
        if (!v) return std::string();
        return percent ? fmt(*v * 100.0, 2) : fmt(*v, 6);
    };
    auto mean = [&](double v) { return percent ? fmt(v, 2) : fmt(v, 6); };
    std::vector<std::string> cells{r.persona_id, r.mode, acc(r.knowledge_acc), acc(r.tone_acc)};
    for (const auto* m : {&r.new_fan, &r.old_fan}) {
        if (*m) {
            for (double v : (*m)->means) cells.push_back(mean(v));
            cells.push_back(mean((*m)->all()));
        } else {
            cells.insert(cells.end(), 4, std::string());
        }
    }
    return cells;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    return cells;
}

}  // namespace

Json to_json(const EvalReport& r) {
    return {{"persona_id", r.persona_id},
            {"mode", r.mode},
            {"knowledge_acc", opt(r.knowledge_acc)},
            {"tone_acc", opt(r.tone_acc)},
            {"new_fan", fan_json(r.new_fan, FanType::New)},
            {"old_fan", fan_json(r.old_fan, FanType::Old)}};
}

EvalReport report_from_json(const Json& j) {
    try {
        EvalReport r;
        r.persona_id = j.at("persona_id").get<std::string>();
        r.mode = j.at("mode").get<std::string>();
        r.knowledge_acc = opt_from(j.at("knowledge_acc"));
        r.tone_acc = opt_from(j.at("tone_acc"));
        r.new_fan = fan_from_json(j.at("new_fan"), FanType::New);
        r.old_fan = fan_from_json(j.at("old_fan"), FanType::Old);
        return r;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("report: ") + e.what());
    }
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "table_text" || s == "txt" || s == "text") return ReportFormat::TableText;
    if (s == "json") return ReportFormat::Json;
    if (s == "csv") return ReportFormat::Csv;
    fail(Errc::Usage, "unknown report format '" + std::string(s) + "' (expected table_text, json or csv)");
}

std::string_view report_format_extension(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::TableText: return "txt";
        case ReportFormat::Json: return "json";
        case ReportFormat::Csv: return "csv";
    }
    return "txt";
}

std::string emit_report(const std::vector<EvalReport>& reports, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            Json arr = Json::array();
            for (const auto& r : reports) arr.push_back(to_json(r));
            return arr.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::string out = join(std::vector<std::string>(kCsvColumns.begin(), kCsvColumns.end()), ",") + "\n";
            for (const auto& r : reports) {
                auto cells = row_cells(r, false);
                for (auto& c : cells) c = csv_escape(c);
                out += join(cells, ",") + "\n";
            }
            return out;
        }
        case ReportFormat::TableText: {
            std::vector<std::vector<std::string>> rows;
            rows.emplace_back(kCsvColumns.begin(), kCsvColumns.end());
            rows[0][7] = "ALL";
            rows[0][11] = "ALL";
            for (const auto& r : reports) {
                auto cells = row_cells(r, true);
                for (auto& c : cells)
                    if (c.empty()) c = "-";
                rows.push_back(std::move(cells));
            }
            std::vector<std::size_t> width(kCsvColumns.size(), 0);
            for (const auto& row : rows)
                for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
            std::string out;
            for (const auto& row : rows) {
                std::string line;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i) line += "  ";
                    line += row[i] + std::string(width[i] - row[i].size(), ' ');
                }
                while (!line.empty() && line.back() == ' ') line.pop_back();
                out += line + "\n";
            }
            return out;
        }
    }
    return {};
}

std::vector<HumanScore> parse_human_csv(const std::string& text) {
    std::istringstream in(normalize_newlines(text));
    std::string line;
    std::size_t line_no = 0;
    std::vector<HumanScore> out;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        for (auto& c : cells) c = trim(c);
        if (!header_seen) {
            require(cells == std::vector<std::string>{"session_id", "dimension", "score", "annotator_id"},
                    Errc::MalformedRecord, "human CSV header must be session_id,dimension,score,annotator_id");
            header_seen = true;
            continue;
        }
        const std::string where = "human CSV line " + std::to_string(line_no);
        require(cells.size() == 4, Errc::MalformedRecord, where + ": expected 4 fields");
        HumanScore h;
        h.session_id = cells[0];
        try {
            h.dimension = evalkit::parse_dimension(cells[1]);
        } catch (const Error&) {
            fail(Errc::MalformedRecord, where + ": unknown dimension '" + cells[1] + "'");
        }
        std::size_t used = 0;
        try {
            h.score = std::stod(cells[2], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used == cells[2].size() && used > 0, Errc::MalformedRecord, where + ": bad score '" + cells[2] + "'");
        h.annotator_id = cells[3];
        out.push_back(std::move(h));
    }
    require(header_seen, Errc::MalformedRecord, "human CSV is empty");
    return out;
}

CorrelationUnit parse_correlation_unit(std::string_view s) {
    if (s == "item") return CorrelationUnit::Item;
    if (s == "session") return CorrelationUnit::Session;
    fail(Errc::Usage, "unknown correlation unit '" + std::string(s) + "' (expected item or session)");
}

std::map<FanType, CorrelationResult> correlate_with_humans(const std::vector<evalkit::JudgedSession>& machine,
                                                           const std::vector<HumanScore>& humans,
                                                           CorrelationUnit unit) {
    using Key = std::pair<std::string, std::string>;  // (session_id, dimension code)
    std::map<Key, double> machine_scores;
    std::map<Key, FanType> key_type;
    for (const auto& s : machine) {
        for (const auto& sc : s.scores) {
            const Key k{s.session_id, std::string(evalkit::dimension_code(sc.dimension))};
            machine_scores[k] = sc.score;
            key_type[k] = s.fan_type;
        }
    }
    std::map<Key, std::pair<double, int>> human_acc;
    for (const auto& h : humans) {
        auto& [sum, n] = human_acc[{h.session_id, std::string(evalkit::dimension_code(h.dimension))}];
        sum += h.score;
        ++n;
    }

    std::vector<std::string> unmatched;
    for (const auto& [k, _] : machine_scores)
        if (!human_acc.count(k)) unmatched.push_back("machine-only " + k.first + "/" + k.second);
    for (const auto& [k, _] : human_acc)
        if (!machine_scores.count(k)) unmatched.push_back("human-only " + k.first + "/" + k.second);
    if (!unmatched.empty()) {
        const std::size_t shown = std::min<std::size_t>(unmatched.size(), 20);
        std::string msg = std::to_string(unmatched.size()) + " unmatched key(s): " +
                          join(std::vector<std::string>(unmatched.begin(), unmatched.begin() + shown), ", ");
        if (shown < unmatched.size()) msg += ", ...";
        fail(Errc::JoinMismatch, msg);
    }

    std::map<FanType, std::pair<std::vector<double>, std::vector<double>>> vectors;
    if (unit == CorrelationUnit::Item) {
        for (const auto& [k, m] : machine_scores) {
            const auto& [sum, n] = human_acc[k];
            auto& [xs, ys] = vectors[key_type[k]];
            xs.push_back(m);
            ys.push_back(sum / n);
        }
    } else {
        std::map<std::string, std::pair<double, double>> per_session;
        std::map<std::string, FanType> session_type;
        for (const auto& [k, m] : machine_scores) {
            const auto& [sum, n] = human_acc[k];
            per_session[k.first].first += m;
            per_session[k.first].second += sum / n;
            session_type[k.first] = key_type[k];
        }
        for (const auto& [id, pair] : per_session) {
            auto& [xs, ys] = vectors[session_type[id]];
            xs.push_back(pair.first);
            ys.push_back(pair.second);
        }
    }
    std::map<FanType, CorrelationResult> out;
    for (const auto& [type, xy] : vectors) out[type] = correlate(xy.first, xy.second);
    return out;
}

Json to_json(const std::map<FanType, CorrelationResult>& results) {
    Json out = Json::object();
    for (const auto& [type, r] : results) out[std::string(evalkit::fan_type_name(type))] = to_json(r);
    return out;
}

}  // namespace forge::stats
