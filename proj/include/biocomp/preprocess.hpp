#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biocomp/cvxeda.hpp"
#include "biocomp/error.hpp"
#include "biocomp/filter.hpp"
#include "biocomp/ingest.hpp"
#include "biocomp/signal.hpp"

namespace biocomp {

inline constexpr double kBaselineSeconds = 30.0;

struct ChannelBaseline {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n_samples = 0;
    double window_start = 0.0;
    double window_end = 0.0;
};

struct BaselineStats {
    std::map<ChannelKind, ChannelBaseline> channels;

    const ChannelBaseline& at(ChannelKind k) const {
        auto it = channels.find(k);
        if (it == channels.end())
            throw MissingChannelError("no baseline statistics for " + std::string(channel_name(k)));
        return it->second;
    }
};

/// Mean and sample standard deviation (divisor n - 1) of one channel over [t0, t1].
inline ChannelBaseline channel_baseline(const SampledSignal& s, double t0, double t1) {
    constexpr double slack = 1e-6;
    if (s.empty() || s.start_time > t0 + slack || s.end_time() < t1 - slack)
        throw InsufficientBaselineError(std::string(channel_name(s.kind)) + " does not cover the baseline window");
    const auto [a, b] = sample_range(s, t0, t1);
    if (b - a < 2)
        throw InsufficientBaselineError(std::string(channel_name(s.kind)) + " has fewer than 2 baseline samples");
    double sum = 0.0;
    for (std::size_t i = a; i < b; ++i) sum += s.values[i];
    const double n = static_cast<double>(b - a);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = a; i < b; ++i) ss += (s.values[i] - mean) * (s.values[i] - mean);
    return {mean, std::sqrt(ss / (n - 1.0)), b - a, t0, t1};
}

inline BaselineStats baseline_stats(const Session& session) {
    BaselineStats stats;
    const double t1 = session.baseline_end;
    const double t0 = t1 - kBaselineSeconds;
    for (const auto& [kind, sig] : session.channels) stats.channels[kind] = channel_baseline(sig, t0, t1);
    return stats;
}

inline SampledSignal zscore(const SampledSignal& s, const ChannelBaseline& b) {
    if (!(b.std > 0.0))
        throw DegenerateBaselineError(std::string(channel_name(s.kind)) + " baseline has zero variance");
    std::vector<double> out(s.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (s.values[i] - b.mean) / b.std;
    return s.with_values(std::move(out));
}

inline SampledSignal zscore(const SampledSignal& s, const BaselineStats& stats) { return zscore(s, stats.at(s.kind)); }

inline constexpr int kFilterOrder = 4;

/// Zero-phase Butterworth filter. low_hz = 0 gives a low-pass, an absent high_hz a high-pass.
inline SampledSignal bandpass(const SampledSignal& s, double low_hz, std::optional<double> high_hz) {
    if (low_hz < 0.0) throw FilterDesignError("negative low edge");
    Sos sos;
    if (low_hz == 0.0 && !high_hz) throw FilterDesignError("band is the whole spectrum");
    if (low_hz == 0.0)
        sos = butterworth(kFilterOrder, BandType::LowPass, 0.0, *high_hz, s.sample_rate);
    else if (!high_hz)
        sos = butterworth(kFilterOrder, BandType::HighPass, low_hz, 0.0, s.sample_rate);
    else {
        if (!(low_hz < *high_hz)) throw FilterDesignError("low edge must be below high edge");
        sos = butterworth(kFilterOrder, BandType::BandPass, low_hz, *high_hz, s.sample_rate);
    }
    return s.with_values(sosfiltfilt(sos, s.values));
}

enum class EegBand { Delta, Theta, Alpha, Beta, Gamma };

inline constexpr std::array<EegBand, 5> kEegBands{EegBand::Delta, EegBand::Theta, EegBand::Alpha, EegBand::Beta,
                                                  EegBand::Gamma};

constexpr const char* band_name(EegBand b) noexcept {
    switch (b) {
        case EegBand::Delta: return "delta";
        case EegBand::Theta: return "theta";
        case EegBand::Alpha: return "alpha";
        case EegBand::Beta: return "beta";
        case EegBand::Gamma: return "gamma";
    }
    return "?";
}

struct BandEdges {
    double low;
    std::optional<double> high;
};

constexpr BandEdges band_edges(EegBand b) noexcept {
    switch (b) {
        case EegBand::Delta: return {0.0, 4.0};
        case EegBand::Theta: return {4.0, 8.0};
        case EegBand::Alpha: return {8.0, 12.0};
        case EegBand::Beta: return {12.0, 30.0};
        case EegBand::Gamma: return {30.0, std::nullopt};
    }
    return {0.0, std::nullopt};
}

inline constexpr BandEdges kBvpBand{1.0, 8.0};

struct EegBands {
    std::array<SampledSignal, 5> bands;

    const SampledSignal& operator[](EegBand b) const { return bands[static_cast<std::size_t>(b)]; }
    SampledSignal& operator[](EegBand b) { return bands[static_cast<std::size_t>(b)]; }
};

inline EegBands eeg_band_split(const SampledSignal& eeg) {
    if (eeg.kind != ChannelKind::EEG_RAW) throw FilterDesignError("eeg_band_split needs an EEG_RAW signal");
    EegBands out;
    for (auto b : kEegBands) {
        const auto e = band_edges(b);
        out[b] = bandpass(eeg, e.low, e.high);
    }
    return out;
}

}  // namespace biocomp
