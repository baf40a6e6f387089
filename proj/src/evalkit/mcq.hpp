#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/json_io.hpp"
#include "common/worker_pool.hpp"
#include "corpus/corpus.hpp"
#include "persona/agent.hpp"
#include "provider/chat.hpp"

namespace forge::evalkit {

// Four options per question; uniform guessing therefore scores 25%.
inline constexpr std::size_t kMcqOptions = 4;

enum class McqDimension { Knowledge, Tone };

std::string_view mcq_dimension_name(McqDimension d) noexcept;
McqDimension parse_mcq_dimension(std::string_view s);

struct McqItem {
    std::string persona_id;
    std::string video_id;
    McqDimension dimension = McqDimension::Knowledge;
    std::string question;
    std::vector<std::string> options;
    int answer_index = 0;
    std::string rationale;

    bool operator==(const McqItem&) const = default;
};

// Empty when the item is valid, otherwise the first violated rule.
std::optional<std::string> item_problem(const McqItem& item);

Json to_json(const McqItem& item);
McqItem mcq_from_json(const Json& j);

struct McqBatch {
    std::vector<McqItem> items;
    std::size_t dropped = 0;  // invalid items still missing after the re-requests
};

// Generates n_items questions from one transcript. Invalid items are
// re-requested (at most twice); whatever is still missing is dropped and
// counted in `dropped`.
McqBatch gen_mcq(const corpus::Transcript& t, McqDimension dimension, provider::ChatPort& chat, std::size_t n_items,
                 const provider::ModelSettings& model = {});

// Question, lettered options and the single-letter answer instruction.
std::string format_question(const McqItem& item);

// Lenient reader for a chosen option: "B", "b)", "(C) because...",
// "The answer is D". Returns 0..3, or nullopt if no letter can be found.
std::optional<int> parse_answer_letter(std::string_view reply);

class AnswerPort {
public:
    virtual ~AnswerPort() = default;
    // Raw reply text for item `index` of the batch being graded.
    virtual std::string answer(const McqItem& item, std::size_t index) = 0;
};

class OracleAnswerer final : public AnswerPort {
public:
    std::string answer(const McqItem& item, std::size_t) override;
};

// Uniform over A-D, seeded per (seed, index) so results do not depend on
// grading order or thread count.
class RandomAnswerer final : public AnswerPort {
public:
    explicit RandomAnswerer(std::uint64_t seed) : seed_(seed) {}
    std::string answer(const McqItem& item, std::size_t index) override;

private:
    std::uint64_t seed_;
};

// Puts each question to the persona agent in a fresh session.
class PersonaAnswerer final : public AnswerPort {
public:
    PersonaAnswerer(std::shared_ptr<const persona::PersonaAgent> agent, persona::ServeMode mode)
        : agent_(std::move(agent)), mode_(mode) {}
    std::string answer(const McqItem& item, std::size_t index) override;

private:
    std::shared_ptr<const persona::PersonaAgent> agent_;
    persona::ServeMode mode_;
};

struct GradeRecord {
    std::size_t item_index = 0;
    int gold = 0;
    std::optional<int> chosen;
    bool correct = false;
    bool parse_failed = false;
};

struct GradeResult {
    double accuracy = 0.0;  // correct / total; unparseable answers count as wrong
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t parse_failures = 0;
    std::vector<GradeRecord> records;
};

GradeResult grade_mcq(const std::vector<McqItem>& items, AnswerPort& answerer, const WorkerPool& pool = WorkerPool{});

Json to_json(const GradeResult& g);

}  // namespace forge::evalkit
