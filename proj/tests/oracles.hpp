#pragma once

// Deliberately naive reference implementations, written independently of
// src/stats so the two can check each other.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace forge::test::oracle {

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    long double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    long double cov = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    if (vx == 0 || vy == 0) return std::nullopt;
    return static_cast<double>(cov / std::sqrt(vx * vy));
}

// Rank of v[i] = 1 + (#smaller) + (#equal others) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double smaller = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) smaller += 1;
            else if (v[j] == v[i] && j != i) equal += 1;
        }
        r[i] = 1 + smaller + equal / 2;
    }
    return r;
}

inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

// Tau-b from the full sign-product matrix.
inline std::optional<double> kendall(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    auto sgn = [](double d) { return d > 0 ? 1 : d < 0 ? -1 : 0; };
    long long s = 0, ax = 0, ay = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const int a = sgn(x[i] - x[j]), b = sgn(y[i] - y[j]);
            s += a * b;
            ax += a * a;
            ay += b * b;
        }
    if (ax == 0 || ay == 0) return std::nullopt;
    return static_cast<double>(s) / std::sqrt(static_cast<double>(ax) * static_cast<double>(ay));
}

}  // namespace forge::test::oracle
