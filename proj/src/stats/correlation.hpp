#pragma once

#include <optional>
#include <vector>

#include "common/json_io.hpp"

namespace forge::stats {

// nullopt means "not defined": fewer than two points or a constant input.
// Mismatched lengths throw LengthMismatch.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);
// Tau-b, by exhaustive pair comparison.
std::optional<double> kendall(const std::vector<double>& x, const std::vector<double>& y);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& v);

struct CorrelationResult {
    std::optional<double> pearson_r;
    std::optional<double> spearman_rho;
    std::optional<double> kendall_tau;
    std::size_t n = 0;
};

CorrelationResult correlate(const std::vector<double>& x, const std::vector<double>& y);

// Undefined coefficients serialize as the string "NotDefined".
Json to_json(const CorrelationResult& r);

}  // namespace forge::stats
