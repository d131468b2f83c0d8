#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "biocomp/signal.hpp"

namespace biocomp {

struct Peak {
    std::size_t index = 0;
    double amplitude = 0.0;

    friend bool operator==(const Peak&, const Peak&) = default;
};

struct PeakParams {
    double min_distance_s = 0.0;
    double min_prominence = 0.0;
};

/// Strict local maxima; a flat top counts once, at its middle sample.
inline std::vector<std::size_t> local_maxima(std::span<const double> x) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    if (n < 3) return out;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i - 1] < x[i]) {
            std::size_t ahead = i + 1;
            while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
            if (x[ahead] < x[i]) {
                out.push_back((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
            i = ahead;
            continue;
        }
        ++i;
    }
    return out;
}

/// Height of a peak above the higher of the two lowest points reachable
/// before meeting a strictly higher sample on either side.
inline double prominence(std::span<const double> x, std::size_t peak) {
    const double h = x[peak];
    double left_min = h;
    for (std::size_t i = peak + 1; i-- > 0;) {
        if (x[i] > h) break;
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = peak; i < x.size(); ++i) {
        if (x[i] > h) break;
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

inline std::vector<Peak> detect_peaks(std::span<const double> x, double rate, const PeakParams& p) {
    std::vector<std::size_t> cand;
    for (auto i : local_maxima(x))
        if (prominence(x, i) >= p.min_prominence) cand.push_back(i);

    const double min_gap = p.min_distance_s * rate;
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[cand[a]] > x[cand[b]]; });
    std::vector<bool> keep(cand.size(), true);
    for (auto k : order) {
        if (!keep[k]) continue;
        for (std::size_t j = k; j-- > 0 && static_cast<double>(cand[k] - cand[j]) < min_gap;) keep[j] = false;
        for (std::size_t j = k + 1; j < cand.size() && static_cast<double>(cand[j] - cand[k]) < min_gap; ++j)
            keep[j] = false;
    }
    std::vector<Peak> out;
    for (std::size_t k = 0; k < cand.size(); ++k)
        if (keep[k]) out.push_back({cand[k], x[cand[k]]});
    return out;
}

inline std::vector<Peak> detect_peaks(const SampledSignal& s, const PeakParams& p) {
    return detect_peaks(std::span<const double>(s.values), s.sample_rate, p);
}

}  // namespace biocomp
