#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "biocomp/error.hpp"

namespace biocomp::learn {

struct CorrelationResult {
    double tau = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

namespace detail {

/// Sums over tie groups of sorted values: t(t-1)/2, t(t-1)(t-2), t(t-1)(2t+5).
struct TieSums {
    double pairs = 0.0, v1 = 0.0, v2 = 0.0, v5 = 0.0;
};

inline TieSums tie_sums(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    TieSums s;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        const double t = static_cast<double>(j - i);
        s.pairs += t * (t - 1.0) / 2.0;
        s.v1 += t * (t - 1.0);
        s.v2 += t * (t - 1.0) * (t - 2.0);
        s.v5 += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    return s;
}

/// Inversions of v (pairs i < j with v[i] > v[j]) by merge sort; sorts v.
inline std::uint64_t count_inversions(std::vector<double>& v) {
    std::vector<double> buf(v.size());
    std::uint64_t inv = 0;
    for (std::size_t width = 1; width < v.size(); width *= 2) {
        for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, v.size()), hi = std::min(lo + 2 * width, v.size());
            std::size_t a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (v[b] < v[a]) {
                    buf[k++] = v[b++];
                    inv += mid - a;
                } else {
                    buf[k++] = v[a++];
                }
            }
            while (a < mid) buf[k++] = v[a++];
            while (b < hi) buf[k++] = v[b++];
        }
        std::swap(v, buf);
    }
    return inv;
}

}  // namespace detail

/// Kendall tau-b with a two-sided p-value from the normal approximation using
/// the tie-corrected variance of the concordant-minus-discordant count.
inline CorrelationResult kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("kendall_tau: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw CorrelationUndefinedError("kendall_tau needs at least two observations");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    // Pairs tied in both x and y.
    double joint = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]]) ++j;
        const double t = static_cast<double>(j - i);
        joint += t * (t - 1.0) / 2.0;
        i = j;
    }
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    const auto tx = detail::tie_sums(std::vector<double>(x.begin(), x.end()));
    const auto ty = detail::tie_sums(std::vector<double>(y.begin(), y.end()));
    const double swaps = static_cast<double>(detail::count_inversions(ys));

    const double nd = static_cast<double>(n);
    const double n0 = nd * (nd - 1.0) / 2.0;
    if (tx.pairs == n0 || ty.pairs == n0) throw CorrelationUndefinedError("kendall_tau: a variable is constant");
    // Within x-ties, y was sorted ascending, so inversions count only discordant pairs.
    const double discordant = swaps;
    const double concordant = n0 - tx.pairs - ty.pairs + joint - discordant;
    const double s = concordant - discordant;
    const double tau = s / std::sqrt((n0 - tx.pairs) * (n0 - ty.pairs));

    const double var = (nd * (nd - 1.0) * (2.0 * nd + 5.0) - tx.v5 - ty.v5) / 18.0 +
                       tx.v1 * ty.v1 / (2.0 * nd * (nd - 1.0)) +
                       (n > 2 ? tx.v2 * ty.v2 / (9.0 * nd * (nd - 1.0) * (nd - 2.0)) : 0.0);
    const double z = s / std::sqrt(var);
    const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
    return {std::clamp(tau, -1.0, 1.0), std::clamp(p, 0.0, 1.0), n};
}

}  // namespace biocomp::learn
