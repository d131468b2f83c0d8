#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biocomp {

enum class ChannelKind { EDA, BVP, EEG_RAW, ATTENTION, MEDITATION };

inline constexpr std::array<ChannelKind, 5> kAllChannels{ChannelKind::EDA, ChannelKind::BVP, ChannelKind::EEG_RAW,
                                                         ChannelKind::ATTENTION, ChannelKind::MEDITATION};

constexpr std::string_view channel_name(ChannelKind kind) noexcept {
    switch (kind) {
        case ChannelKind::EDA: return "EDA";
        case ChannelKind::BVP: return "BVP";
        case ChannelKind::EEG_RAW: return "EEG_RAW";
        case ChannelKind::ATTENTION: return "ATTENTION";
        case ChannelKind::MEDITATION: return "MEDITATION";
    }
    return "?";
}

inline std::optional<ChannelKind> parse_channel_kind(std::string_view name) noexcept {
    for (auto k : kAllChannels)
        if (channel_name(k) == name) return k;
    return std::nullopt;
}

/// Device sampling rate in Hz (Empatica E4 EDA/BVP, BrainLink raw EEG and eSense).
constexpr double nominal_rate(ChannelKind kind) noexcept {
    switch (kind) {
        case ChannelKind::EDA: return 4.0;
        case ChannelKind::BVP: return 64.0;
        case ChannelKind::EEG_RAW: return 512.0;
        case ChannelKind::ATTENTION:
        case ChannelKind::MEDITATION: return 1.0;
    }
    return 0.0;
}

/// A uniformly sampled channel. Sample i is taken at start_time + i / sample_rate.
struct SampledSignal {
    ChannelKind kind = ChannelKind::EDA;
    double sample_rate = 1.0;
    double start_time = 0.0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    double time_at(std::size_t i) const noexcept { return start_time + static_cast<double>(i) / sample_rate; }
    double end_time() const noexcept { return empty() ? start_time : time_at(size() - 1); }

    /// Same metadata, new samples.
    SampledSignal with_values(std::vector<double> v) const {
        return SampledSignal{kind, sample_rate, start_time, std::move(v)};
    }

    friend bool operator==(const SampledSignal&, const SampledSignal&) = default;
};

/// Half-open index range [first, last) of samples whose timestamps lie in [t0, t1].
inline std::pair<std::size_t, std::size_t> sample_range(const SampledSignal& s, double t0, double t1) {
    constexpr double eps = 1e-9;
    const double lo = std::ceil((t0 - s.start_time) * s.sample_rate - eps);
    const double hi = std::floor((t1 - s.start_time) * s.sample_rate + eps);
    const double n = static_cast<double>(s.size());
    const double first = std::max(lo, 0.0);
    const double last = std::min(hi + 1.0, n);
    if (last <= first) return {0, 0};
    return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

/// Samples with timestamps in [t0, t1]; start_time moves to the first retained sample.
inline SampledSignal slice_time(const SampledSignal& s, double t0, double t1) {
    const auto [a, b] = sample_range(s, t0, t1);
    SampledSignal out{s.kind, s.sample_rate, s.time_at(a), {}};
    out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(a), s.values.begin() + static_cast<std::ptrdiff_t>(b));
    return out;
}

}  // namespace biocomp
