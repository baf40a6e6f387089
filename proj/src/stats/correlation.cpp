#include "stats/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/errors.hpp"

namespace forge::stats {

namespace {

void check_lengths(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), Errc::LengthMismatch,
            "length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    check_lengths(x, y);
    const auto n = x.size();
    if (n < 2) return std::nullopt;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return clamp_unit(sxy / std::sqrt(sxx * syy));
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check_lengths(x, y);
    return pearson(average_ranks(x), average_ranks(y));
}

std::optional<double> kendall(const std::vector<double>& x, const std::vector<double>& y) {
    check_lengths(x, y);
    const auto n = x.size();
    if (n < 2) return std::nullopt;
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const int sx = sign(x[i] - x[j]);
            const int sy = sign(y[i] - y[j]);
            if (sx == 0) ++ties_x;
            if (sy == 0) ++ties_y;
            if (sx * sy > 0) ++concordant;
            else if (sx * sy < 0) ++discordant;
        }
    }
    const long long pairs = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
    const double denom = std::sqrt(static_cast<double>(pairs - ties_x) * static_cast<double>(pairs - ties_y));
    if (denom == 0.0) return std::nullopt;
    return clamp_unit(static_cast<double>(concordant - discordant) / denom);
}

CorrelationResult correlate(const std::vector<double>& x, const std::vector<double>& y) {
    check_lengths(x, y);
    return {pearson(x, y), spearman(x, y), kendall(x, y), x.size()};
}

Json to_json(const CorrelationResult& r) {
    auto cell = [](const std::optional<double>& v) { return v ? Json(*v) : Json("NotDefined"); };
    return {{"pearson_r", cell(r.pearson_r)}, {"spearman_rho", cell(r.spearman_rho)},
            {"kendall_tau", cell(r.kendall_tau)}, {"n", r.n}};
}

}  // namespace forge::stats
