#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stats/correlation.hpp"
#include "stats/report.hpp"
#include "support.hpp"

using namespace forge;
using namespace forge::stats;
using evalkit::Dimension;
using evalkit::FanType;
using evalkit::JudgedSession;
using forge::test::code_of;
namespace oracle = forge::test::oracle;

namespace {

std::vector<double> seq(int n, double (*f)(double)) {
    std::vector<double> v;
    for (int i = 1; i <= n; ++i) v.push_back(f(i));
    return v;
}

JudgedSession judged(const std::string& id, FanType t, std::array<int, 3> s, const std::string& mode = "profile_rag") {
    JudgedSession j{id, "p1", mode, t, {}};
    const auto dims = evalkit::dimensions_for(t);
    for (int i = 0; i < 3; ++i) j.scores.push_back({dims[i], s[i], ""});
    return j;
}

std::string human_csv(const std::vector<std::tuple<std::string, std::string, double, std::string>>& rows) {
    std::string out = "session_id,dimension,score,annotator_id\n";
    for (const auto& [s, d, v, a] : rows) {
        std::ostringstream line;
        line << s << ',' << d << ',' << v << ',' << a << '\n';
        out += line.str();
    }
    return out;
}

}  // namespace

TEST_CASE("pearson") {
    const auto x = seq(10, [](double i) { return i; });
    CHECK(*pearson(x, seq(10, [](double i) { return 2 * i + 1; })) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*pearson(x, seq(10, [](double i) { return -i; })) == -1.0);

    const std::vector<double> a{1, 2, 3, 5}, b{2, 1, 4, 6};
    // mean(a)=2.75, mean(b)=3.25; cov sum = 10.25, sum sq a = 8.75, sum sq b = 14.75
    CHECK(*pearson(a, b) == doctest::Approx(10.25 / std::sqrt(8.75 * 14.75)).epsilon(1e-12));

    CHECK_FALSE(pearson({1}, {2}).has_value());
    CHECK_FALSE(pearson({1, 1, 1}, {1, 2, 3}).has_value());
    CHECK(code_of([] { pearson({1, 2}, {1, 2, 3}); }) == Errc::LengthMismatch);
}

TEST_CASE("spearman") {
    const auto x = seq(8, [](double i) { return i; });
    CHECK(*spearman(x, seq(8, [](double i) { return std::exp(i) - 3; })) == 1.0);
    CHECK(*spearman(x, seq(8, [](double i) { return 100 - i * i; })) == -1.0);

    const std::vector<double> a{1, 2, 2, 4}, b{1, 3, 2, 4};
    CHECK(average_ranks(a) == std::vector<double>{1, 2.5, 2.5, 4});
    CHECK(*spearman(a, b) == doctest::Approx(*oracle::spearman(a, b)).epsilon(1e-12));
}

TEST_CASE("kendall") {
    CHECK(*kendall({1, 2, 3, 4}, {10, 20, 30, 40}) == 1.0);
    CHECK(*kendall({1, 2, 3, 4}, {4, 3, 2, 1}) == -1.0);
    // 5 concordant pairs, 1 discordant, no ties: (5 - 1) / 6.
    CHECK(*kendall({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    const std::vector<double> tx{1, 1, 2, 3}, ty{1, 2, 2, 3};
    CHECK(*kendall(tx, ty) == doctest::Approx(*oracle::kendall(tx, ty)).epsilon(1e-12));
    CHECK_FALSE(kendall({2, 2}, {1, 3}).has_value());
}

TEST_CASE("correlations agree with the oracles on random tied vectors") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 20);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = static_cast<double>(rng() % 5);
            y[i] = static_cast<double>(rng() % 4) + 0.5;
        }
        auto r = correlate(x, y);
        CHECK(r.n == static_cast<std::size_t>(n));
        CHECK(r.pearson_r.has_value() == oracle::pearson(x, y).has_value());
        if (r.pearson_r) CHECK(std::abs(*r.pearson_r - *oracle::pearson(x, y)) < 1e-9);
        if (r.spearman_rho) CHECK(std::abs(*r.spearman_rho - *oracle::spearman(x, y)) < 1e-9);
        if (r.kendall_tau) CHECK(std::abs(*r.kendall_tau - *oracle::kendall(x, y)) < 1e-9);
    }
}

TEST_CASE("undefined coefficients serialize as NotDefined") {
    auto j = to_json(correlate({1, 1}, {1, 2}));
    CHECK(j["pearson_r"] == "NotDefined");
    CHECK(j["n"] == 2);
}

TEST_CASE("aggregate means") {
    std::vector<JudgedSession> ones;
    for (int i = 0; i < 4; ++i) ones.push_back(judged("s" + std::to_string(i), FanType::New, {1, 1, 1}));
    auto r = aggregate("p1", "profile_rag", ones);
    REQUIRE(r.new_fan);
    CHECK(r.new_fan->means == std::array<double, 3>{1.0, 1.0, 1.0});
    CHECK(r.new_fan->all() == 3.0);
    CHECK_FALSE(r.old_fan.has_value());

    std::vector<JudgedSession> mixed{judged("a", FanType::New, {1, 3, 2}), judged("b", FanType::New, {3, 3, 1}),
                                     judged("c", FanType::New, {2, 1, 1}), judged("d", FanType::Old, {2, 2, 3})};
    r = aggregate("p1", "profile_rag", mixed, {0.5, 0.75});
    std::array<double, 3> expect{};
    for (int d = 0; d < 3; ++d) {
        double sum = 0;
        for (int s = 0; s < 3; ++s) sum += mixed[s].scores[d].score;
        expect[d] = sum / 3;
    }
    for (int d = 0; d < 3; ++d) CHECK(std::abs(r.new_fan->means[d] - expect[d]) < 1e-12);
    CHECK(r.new_fan->session_count == 3);
    CHECK(r.old_fan->means == std::array<double, 3>{2, 2, 3});
    CHECK(r.knowledge_acc == 0.5);
}

TEST_CASE("aggregate rejects incomplete sessions") {
    auto missing = judged("a", FanType::New, {1, 2, 3});
    missing.scores.pop_back();
    CHECK(code_of([&] { aggregate("p1", "m", {missing}); }) == Errc::IncompleteSession);
    auto foreign = judged("a", FanType::New, {1, 2, 3});
    foreign.scores[0].dimension = Dimension::FR;
    CHECK(code_of([&] { aggregate("p1", "m", {foreign}); }) == Errc::IncompleteSession);
    auto dup = judged("a", FanType::New, {1, 2, 3});
    dup.scores[2].dimension = Dimension::CC;
    CHECK(code_of([&] { aggregate("p1", "m", {dup}); }) == Errc::IncompleteSession);
    auto range = judged("a", FanType::New, {1, 2, 4});
    CHECK(code_of([&] { aggregate("p1", "m", {range}); }) == Errc::IncompleteSession);
}

TEST_CASE("report emission") {
    auto rag = aggregate("p1", "profile_rag", {judged("a", FanType::New, {1, 2, 3}), judged("b", FanType::Old, {3, 3, 2})},
                         {0.7290, 0.8825});
    auto only = aggregate("p1", "profile_only", {judged("c", FanType::New, {2, 2, 2})}, {0.25, std::nullopt});

    auto json = Json::parse(emit_report({rag, only}, ReportFormat::Json));
    REQUIRE(json.size() == 2);
    auto back = report_from_json(json[0]);
    CHECK(back.mode == "profile_rag");
    CHECK(back.knowledge_acc == rag.knowledge_acc);
    CHECK(back.new_fan->means == rag.new_fan->means);
    CHECK(back.old_fan->session_count == 1);
    CHECK(json[0]["new_fan"]["ALL"] == 6.0);
    CHECK(report_from_json(json[1]).old_fan.has_value() == false);
    CHECK(emit_report({back, report_from_json(json[1])}, ReportFormat::Json) == emit_report({rag, only}, ReportFormat::Json));

    const auto csv = emit_report({rag, only}, ReportFormat::Csv);
    const auto header = csv.substr(0, csv.find('\n'));
    CHECK(header == "persona_id,mode,Know,Tone,CC,IA,EA,ALL_new,FR,CR,CA,ALL_old");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("p1,profile_only,0.250000,,2.000000,2.000000,2.000000,6.000000,,,,") != std::string::npos);

    const auto text = emit_report({rag, only}, ReportFormat::TableText);
    std::istringstream lines(text);
    int rows = 0;
    for (std::string line; std::getline(lines, line);)
        if (line.find("p1") != std::string::npos) ++rows;
    CHECK(rows == 2);
    CHECK(text.find("72.90") != std::string::npos);
    CHECK(text.find("88.25") != std::string::npos);

    CHECK(parse_report_format("table_text") == ReportFormat::TableText);
    CHECK(code_of([] { parse_report_format("xml"); }) == Errc::Usage);
}

TEST_CASE("human csv parsing") {
    auto rows = parse_human_csv("session_id,dimension,score,annotator_id\r\ns1,CC,2,ann1\n\ns1,IA,2.5,ann2\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].score == 2.5);
    CHECK(rows[1].dimension == Dimension::IA);
    CHECK(code_of([] { parse_human_csv("a,b,c\n"); }) == Errc::MalformedRecord);
    CHECK(test::message_of([] { parse_human_csv("session_id,dimension,score,annotator_id\ns1,CC,x,a\n"); })
              .find("line 2") != std::string::npos);
    CHECK(code_of([] { parse_human_csv("session_id,dimension,score,annotator_id\ns1,ZZ,1,a\n"); }) ==
          Errc::MalformedRecord);
}

TEST_CASE("human correlation") {
    std::vector<JudgedSession> machine{judged("a", FanType::New, {1, 2, 3}), judged("b", FanType::New, {3, 1, 2}),
                                       judged("c", FanType::Old, {1, 2, 3})};
    std::vector<std::tuple<std::string, std::string, double, std::string>> same;
    for (const auto& s : machine)
        for (const auto& sc : s.scores)
            same.emplace_back(s.session_id, std::string(evalkit::dimension_code(sc.dimension)), sc.score, "h1");
    auto r = correlate_with_humans(machine, parse_human_csv(human_csv(same)));
    CHECK(*r[FanType::New].pearson_r == doctest::Approx(1.0));
    CHECK(*r[FanType::New].spearman_rho == doctest::Approx(1.0));
    CHECK(*r[FanType::New].kendall_tau == doctest::Approx(1.0));
    CHECK(r[FanType::Old].n == 3);

    std::vector<std::tuple<std::string, std::string, double, std::string>> reversed{
        {"c", "FR", 3, "h"}, {"c", "CR", 2, "h"}, {"c", "CA", 1, "h"}};
    auto rev = correlate_with_humans({machine[2]}, parse_human_csv(human_csv(reversed)));
    CHECK(*rev[FanType::Old].pearson_r == -1.0);
    CHECK(*rev[FanType::Old].spearman_rho == -1.0);
    CHECK(*rev[FanType::Old].kendall_tau == -1.0);

    // Two annotators per item, averaged before the join.
    std::vector<std::tuple<std::string, std::string, double, std::string>> partial{
        {"a", "CC", 1, "h1"}, {"a", "CC", 2, "h2"}, {"a", "IA", 3, "h1"}, {"a", "IA", 3, "h2"},
        {"a", "EA", 2, "h1"}, {"a", "EA", 3, "h2"}, {"b", "CC", 2, "h1"}, {"b", "CC", 3, "h2"},
        {"b", "IA", 1, "h1"}, {"b", "IA", 1, "h2"}, {"b", "EA", 1, "h1"}, {"b", "EA", 2, "h2"},
        {"c", "FR", 1, "h1"}, {"c", "CR", 1, "h1"}, {"c", "CA", 2, "h1"}};
    auto pr = correlate_with_humans(machine, parse_human_csv(human_csv(partial)));
    // Joined in (session, dimension-code) key order.
    const std::vector<double> mx{1, 3, 2, 3, 2, 1}, hy{1.5, 2.5, 3, 2.5, 1.5, 1};
    CHECK(std::abs(*pr[FanType::New].pearson_r - *oracle::pearson(mx, hy)) < 1e-9);
    CHECK(std::abs(*pr[FanType::New].spearman_rho - *oracle::spearman(mx, hy)) < 1e-9);
    CHECK(std::abs(*pr[FanType::New].kendall_tau - *oracle::kendall(mx, hy)) < 1e-9);

    auto sess = correlate_with_humans(machine, parse_human_csv(human_csv(partial)), CorrelationUnit::Session);
    CHECK(sess[FanType::New].n == 2);
    CHECK(sess[FanType::Old].n == 1);

    partial.pop_back();
    partial.emplace_back("zz", "CC", 1, "h1");
    const auto msg = test::message_of([&] { correlate_with_humans(machine, parse_human_csv(human_csv(partial))); });
    CHECK(msg.find("JoinMismatch") != std::string::npos);
    CHECK(msg.find("machine-only c/CA") != std::string::npos);
    CHECK(msg.find("human-only zz/CC") != std::string::npos);
}
