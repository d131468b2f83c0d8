#pragma once

// Synthetic sessions with known, class-dependent physiology. Effects are
// planted in the raw signals, so recovering them exercises the whole chain.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biocomp/error.hpp"
#include "biocomp/filter.hpp"
#include "biocomp/ingest.hpp"
#include "biocomp/preprocess.hpp"
#include "biocomp/random.hpp"
#include "biocomp/segment.hpp"
#include "biocomp/signal.hpp"

namespace biocomp::synth {

struct ClassProfile {
    double hr_bpm = 72.0;
    double hr_jitter_bpm = 2.0;  // sd of the per-task mean heart rate
    double ibi_sd_s = 0.05;
    double bvp_amp = 1.0;
    double scr_rate_per_min = 3.0;
    double scr_amp = 0.3;
    std::array<double, 5> band_weights{0.30, 0.25, 0.20, 0.15, 0.10};
    double attention_mean = 50.0;
    double meditation_mean = 50.0;
    double latency_min_s = 15.0;  // answer time after the task appears
    double latency_max_s = 28.0;

    void validate(const std::string& what) const {
        auto bad = [&](const char* field) { throw SynthError(what + ": invalid " + field); };
        if (!(hr_bpm > 0.0)) bad("hr_bpm");
        if (!(hr_jitter_bpm >= 0.0)) bad("hr_jitter_bpm");
        if (!(ibi_sd_s >= 0.0)) bad("ibi_sd_s");
        if (!(bvp_amp > 0.0)) bad("bvp_amp");
        if (!(scr_rate_per_min >= 0.0)) bad("scr_rate_per_min");
        if (!(scr_amp >= 0.0)) bad("scr_amp");
        double s = 0.0;
        for (double w : band_weights) {
            if (!(w >= 0.0)) bad("band_weights");
            s += w;
        }
        if (!(s > 0.0)) bad("band_weights");
        if (!(attention_mean >= 0.0 && attention_mean <= 100.0)) bad("attention_mean");
        if (!(meditation_mean >= 0.0 && meditation_mean <= 100.0)) bad("meditation_mean");
        if (!(latency_min_s > 0.0 && latency_max_s >= latency_min_s)) bad("latency range");
    }

    std::array<double, 5> normalized_weights() const {
        double s = 0.0;
        for (double w : band_weights) s += w;
        auto out = band_weights;
        for (auto& w : out) w /= s;
        return out;
    }

    /// Pointwise a + t (b - a) over every numeric field.
    static ClassProfile lerp(const ClassProfile& a, const ClassProfile& b, double t) {
        auto m = [t](double x, double y) { return x + t * (y - x); };
        ClassProfile o;
        o.hr_bpm = m(a.hr_bpm, b.hr_bpm);
        o.hr_jitter_bpm = m(a.hr_jitter_bpm, b.hr_jitter_bpm);
        o.ibi_sd_s = m(a.ibi_sd_s, b.ibi_sd_s);
        o.bvp_amp = m(a.bvp_amp, b.bvp_amp);
        o.scr_rate_per_min = m(a.scr_rate_per_min, b.scr_rate_per_min);
        o.scr_amp = m(a.scr_amp, b.scr_amp);
        for (std::size_t i = 0; i < 5; ++i) o.band_weights[i] = m(a.band_weights[i], b.band_weights[i]);
        o.attention_mean = m(a.attention_mean, b.attention_mean);
        o.meditation_mean = m(a.meditation_mean, b.meditation_mean);
        o.latency_min_s = m(a.latency_min_s, b.latency_min_s);
        o.latency_max_s = m(a.latency_max_s, b.latency_max_s);
        return o;
    }
};

inline ClassProfile rest_profile() {
    ClassProfile p;
    p.hr_bpm = 70.0;
    p.scr_rate_per_min = 2.0;
    p.attention_mean = 45.0;
    p.meditation_mean = 55.0;
    return p;
}

struct SynthConfig {
    int n_participants = 28;
    std::uint64_t seed = 1;
    ClassProfile code;
    ClassProfile prose;
    ClassProfile rest = rest_profile();
    int sessions = 3;
    int code_per_session = 3;
    int prose_per_session = 6;
    double unanswered_prob = 0.0;
    double gpa_mean = 3.0;
    double gpa_sd = 0.25;
    /// Scale each participant's CODE-vs-PROSE difference by a GPA-increasing factor.
    bool gpa_linked_effect = false;
    std::set<ChannelKind> channels{kAllChannels.begin(), kAllChannels.end()};
    double start_epoch = 1.6e9;
    double calibration_s = 60.0;

    void validate() const {
        if (n_participants < 2) throw SynthError("synth: need at least 2 participants");
        if (sessions < 1 || code_per_session < 0 || prose_per_session < 0 || code_per_session + prose_per_session < 1)
            throw SynthError("synth: invalid schedule template");
        if (!(unanswered_prob >= 0.0 && unanswered_prob <= 1.0)) throw SynthError("synth: unanswered_prob outside [0, 1]");
        if (!(gpa_sd >= 0.0)) throw SynthError("synth: negative gpa_sd");
        if (calibration_s < kBaselineSeconds) throw SynthError("synth: calibration shorter than the baseline window");
        if (channels.empty()) throw SynthError("synth: no channels selected");
        code.validate("code profile");
        prose.validate("prose profile");
        rest.validate("rest profile");
        if (code.latency_max_s > kCodeDisplaySeconds) throw SynthError("code profile: latency exceeds display time");
        if (prose.latency_max_s > kProseDisplaySeconds) throw SynthError("prose profile: latency exceeds display time");
    }
};

/// CODE and PROSE share one profile: labels carry no signal.
inline SynthConfig null_config(std::uint64_t seed = 1) {
    SynthConfig c;
    c.seed = seed;
    return c;
}

/// Planted heart effect: faster, steadier, stronger pulse during CODE tasks.
inline SynthConfig separable_config(std::uint64_t seed = 1) {
    SynthConfig c;
    c.seed = seed;
    c.code.hr_bpm = 84.0;
    c.code.ibi_sd_s = 0.03;
    c.code.bvp_amp = 1.4;
    return c;
}

/// A weaker planted heart effect whose CODE-vs-PROSE gap grows with GPA.
inline SynthConfig gpa_linked_config(std::uint64_t seed = 1) {
    SynthConfig c;
    c.seed = seed;
    c.code.hr_bpm = 76.0;
    c.code.ibi_sd_s = 0.045;
    c.code.bvp_amp = 1.1;
    c.gpa_linked_effect = true;
    return c;
}

/// Per-participant random effects, independent of task kind.
struct ParticipantTraits {
    double gpa = 3.0;
    double effect_scale = 1.0;
    double hr_offset = 0.0;
    double bvp_gain = 1.0;
    double eda_level = 2.0;
    double eeg_gain = 1.0;
    double attention_offset = 0.0;
};

inline ParticipantTraits draw_traits(const SynthConfig& cfg, Rng& rng) {
    ParticipantTraits t;
    t.gpa = std::clamp(std::round(rng.normal(cfg.gpa_mean, cfg.gpa_sd) * 100.0) / 100.0, 0.0, 4.0);
    if (cfg.gpa_linked_effect) {
        const double lo = cfg.gpa_mean - 2.0 * cfg.gpa_sd, span = 4.0 * cfg.gpa_sd;
        t.effect_scale = span > 0.0 ? std::clamp((t.gpa - lo) / span, 0.0, 1.0) : 1.0;
    }
    t.hr_offset = rng.normal(0.0, 4.0);
    t.bvp_gain = std::max(0.3, rng.normal(1.0, 0.15));
    t.eda_level = std::max(0.5, rng.normal(2.0, 0.5));
    t.eeg_gain = std::max(0.3, rng.normal(1.0, 0.1));
    t.attention_offset = rng.normal(0.0, 5.0);
    return t;
}

/// Piecewise-constant physiological state over the recording.
struct Segment {
    double t0, t1;
    const ClassProfile* profile;
    double hr_jitter;
};

class Timeline {
public:
    Timeline(std::vector<Segment> segs, const ClassProfile* rest) : segs_(std::move(segs)), rest_(rest) {}

    const Segment& at(double t) const {
        while (cursor_ > 0 && t < segs_[cursor_].t0) --cursor_;
        while (cursor_ + 1 < segs_.size() && t >= segs_[cursor_ + 1].t0) ++cursor_;
        if (!segs_.empty() && t >= segs_[cursor_].t0 && t < segs_[cursor_].t1) return segs_[cursor_];
        fallback_ = {t, t, rest_, 0.0};
        return fallback_;
    }

private:
    std::vector<Segment> segs_;
    const ClassProfile* rest_;
    mutable std::size_t cursor_ = 0;
    mutable Segment fallback_{0, 0, nullptr, 0};
};

/// Unit-peak skin conductance response shape with the decomposition's time constants.
inline double scr_kernel(double t, double tau0 = 2.0, double tau1 = 0.7) {
    if (t < 0.0) return 0.0;
    const double tp = tau0 * tau1 / (tau0 - tau1) * std::log(tau0 / tau1);
    const double peak = std::exp(-tp / tau0) - std::exp(-tp / tau1);
    return (std::exp(-t / tau0) - std::exp(-t / tau1)) / peak;
}

inline double scr_peak_delay(double tau0 = 2.0, double tau1 = 0.7) {
    return tau0 * tau1 / (tau0 - tau1) * std::log(tau0 / tau1);
}

namespace detail {

inline std::size_t samples_between(double t0, double t1, double rate) {
    return static_cast<std::size_t>(std::floor((t1 - t0) * rate)) + 1;
}

inline double round_to(double v, double q) { return std::round(v / q) * q; }

/// Raised-cosine pulse train: one period per beat, peak at mid-beat.
/// Returns the signal and the beat centre times.
inline std::pair<SampledSignal, std::vector<double>> make_bvp(double t0, double t1, const Timeline& tl,
                                                              const ParticipantTraits& tr, Rng& rng) {
    const double rate = nominal_rate(ChannelKind::BVP);
    SampledSignal s{ChannelKind::BVP, rate, t0, std::vector<double>(samples_between(t0, t1, rate), 0.0)};
    std::vector<double> centres;
    double t = t0;
    while (t < t1) {
        const auto& seg = tl.at(t);
        const double hr = std::max(30.0, seg.profile->hr_bpm + tr.hr_offset + seg.hr_jitter);
        double ibi = rng.normal(60.0 / hr, seg.profile->ibi_sd_s);
        ibi = std::max(ibi, 0.3 + 1e-9);
        const double amp = seg.profile->bvp_amp * tr.bvp_gain;
        const auto first = static_cast<std::size_t>(std::ceil((t - t0) * rate));
        for (std::size_t i = first; i < s.size(); ++i) {
            const double tau = s.time_at(i) - t;
            if (tau >= ibi) break;
            s.values[i] = amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * tau / ibi));
        }
        centres.push_back(t + ibi / 2.0);
        t += ibi;
    }
    for (auto& v : s.values) v = round_to(v + rng.normal(0.0, 0.01), 1e-4);
    return {std::move(s), std::move(centres)};
}

inline SampledSignal make_eda(double t0, double t1, const Timeline& tl, const ParticipantTraits& tr, Rng& rng) {
    const double rate = nominal_rate(ChannelKind::EDA);
    const std::size_t n = samples_between(t0, t1, rate);
    std::vector<double> v(n, 0.0);
    double level = tr.eda_level;
    for (std::size_t i = 0; i < n; ++i) {
        level += 0.002 * (tr.eda_level - level) + rng.normal(0.0, 0.003);
        v[i] = level;
    }
    const double dt = 1.0 / rate;
    const double tail = 30.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        const auto& seg = tl.at(t);
        const double p = seg.profile->scr_rate_per_min / 60.0 * dt;
        if (!rng.bernoulli(p)) continue;
        const double amp = rng.exponential(seg.profile->scr_amp);
        const auto stop = std::min(n, i + static_cast<std::size_t>(tail * rate));
        for (std::size_t k = i; k < stop; ++k) v[k] += amp * scr_kernel(static_cast<double>(k - i) * dt);
    }
    for (auto& x : v) x = round_to(x + rng.normal(0.0, 0.005), 1e-5);
    return {ChannelKind::EDA, rate, t0, std::move(v)};
}

/// Sum of five band-limited noises; each band's amplitude follows the active profile.
inline SampledSignal make_eeg(double t0, double t1, const Timeline& tl, const ParticipantTraits& tr, Rng& rng) {
    const double rate = nominal_rate(ChannelKind::EEG_RAW);
    const std::size_t n = samples_between(t0, t1, rate);
    std::vector<double> out(n, 0.0);
    std::vector<std::array<double, 5>> gains;
    {
        // One amplitude vector per second keeps the lookup cheap.
        const auto secs = static_cast<std::size_t>(std::ceil(t1 - t0)) + 1;
        gains.resize(secs);
        for (std::size_t k = 0; k < secs; ++k) {
            const auto w = tl.at(t0 + static_cast<double>(k) + 0.5).profile->normalized_weights();
            for (std::size_t b = 0; b < 5; ++b) gains[k][b] = std::sqrt(w[b]);
        }
    }
    std::vector<double> noise(n);
    for (std::size_t b = 0; b < 5; ++b) {
        for (auto& x : noise) x = rng.normal();
        // Gamma is synthesized up to 45 Hz.
        const auto e = band_edges(kEegBands[b]);
        const Sos sos = e.low == 0.0 ? butterworth(4, BandType::LowPass, 0.0, *e.high, rate)
                                     : butterworth(4, BandType::BandPass, e.low, e.high.value_or(45.0), rate);
        const auto band = sosfilt(sos, noise);
        double ss = 0.0;
        for (double x : band) ss += x * x;
        const double norm = ss > 0.0 ? 1.0 / std::sqrt(ss / static_cast<double>(n)) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto sec = static_cast<std::size_t>(static_cast<double>(i) / rate);
            out[i] += 20.0 * tr.eeg_gain * gains[sec][b] * band[i] * norm;
        }
    }
    for (auto& x : out) x = round_to(x, 0.01);
    return {ChannelKind::EEG_RAW, rate, t0, std::move(out)};
}

inline SampledSignal make_esense(ChannelKind kind, double t0, double t1, const Timeline& tl,
                                 const ParticipantTraits& tr, Rng& rng) {
    const double rate = nominal_rate(kind);
    const std::size_t n = samples_between(t0, t1, rate);
    std::vector<double> v(n);
    auto target = [&](double t) {
        const auto* p = tl.at(t).profile;
        return (kind == ChannelKind::ATTENTION ? p->attention_mean : p->meditation_mean) + tr.attention_offset;
    };
    double x = target(t0);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = target(t0 + static_cast<double>(i) / rate);
        x = m + 0.8 * (x - m) + rng.normal(0.0, 5.0);
        v[i] = std::clamp(std::round(x), 0.0, 100.0);
    }
    return {kind, rate, t0, std::move(v)};
}

}  // namespace detail

struct GeneratedSession {
    Session session;
    ParticipantTraits traits;
    std::vector<double> beat_times;  // BVP pulse centres, when BVP was generated
};

inline std::string participant_id(int index, int total) {
    char buf[16];
    std::snprintf(buf, sizeof buf, total >= 100 ? "P%03d" : "P%02d", index + 1);
    return buf;
}

/// One participant's recording. Effects are drawn from the CODE and PROSE profiles
/// during [t_start, t_answer] of each task and from the rest profile elsewhere.
inline GeneratedSession generate_session(const SynthConfig& cfg, int index) {
    cfg.validate();
    const std::uint64_t pseed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(index)});
    Rng rng(derive_seed(pseed, {0}));
    GeneratedSession g;
    g.traits = draw_traits(cfg, rng);

    const ClassProfile code = ClassProfile::lerp(cfg.prose, cfg.code, g.traits.effect_scale);
    const ClassProfile& prose = cfg.prose;

    Session& s = g.session;
    s.participant.id = participant_id(index, cfg.n_participants);
    s.participant.gpa = g.traits.gpa;
    const double t0 = cfg.start_epoch + 100000.0 * index;
    s.baseline_start = t0 + 5.0;
    s.baseline_end = s.baseline_start + cfg.calibration_s;
    s.t_start_experiment = s.baseline_end + 5.0;
    s.sessions = cfg.sessions;

    for (int si = 1; si <= cfg.sessions; ++si) {
        std::vector<TaskKind> kinds(static_cast<std::size_t>(cfg.code_per_session), TaskKind::CODE);
        kinds.insert(kinds.end(), static_cast<std::size_t>(cfg.prose_per_session), TaskKind::PROSE);
        rng.shuffle(std::span<TaskKind>(kinds));
        int nc = 0, np = 0;
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            TaskEvent e;
            e.kind = kinds[k];
            e.session_index = si;
            e.position_in_session = static_cast<int>(k) + 1;
            e.task_id = "s" + std::to_string(si) + (e.kind == TaskKind::CODE ? "-code" + std::to_string(++nc)
                                                                               : "-prose" + std::to_string(++np));
            s.events.push_back(std::move(e));
        }
    }
    // Answer times follow the fixed display schedule.
    {
        Session tmp = s;
        for (auto& e : tmp.events) e.answer = Answer::NONE;
        const auto starts = compute_schedule(tmp).starts;
        for (std::size_t i = 0; i < s.events.size(); ++i) {
            auto& e = s.events[i];
            if (rng.bernoulli(cfg.unanswered_prob)) continue;
            const auto& p = e.kind == TaskKind::CODE ? code : prose;
            e.t_answer = starts[i] + rng.uniform(p.latency_min_s, p.latency_max_s);
            e.answer = rng.bernoulli(0.5) ? Answer::ACCEPT : Answer::REJECT;
        }
    }
    const auto sched = compute_schedule(s);
    double t_end = s.t_start_experiment;
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const auto& e = s.events[i];
        const double start = sched.starts[i];
        const double stop = e.t_answer ? *e.t_answer : start + nominal_duration(e.kind);
        const ClassProfile* p = e.kind == TaskKind::CODE ? &code : &prose;
        segs.push_back({start, stop, p, rng.normal(0.0, p->hr_jitter_bpm)});
        t_end = std::max(t_end, start + nominal_duration(e.kind));
    }
    t_end += 5.0;
    const Timeline tl(segs, &cfg.rest);

    for (auto kind : kAllChannels) {
        Rng crng(derive_seed(pseed, {1, static_cast<std::uint64_t>(kind)}));
        if (!cfg.channels.contains(kind)) continue;
        switch (kind) {
            case ChannelKind::BVP: {
                auto [sig, beats] = detail::make_bvp(t0, t_end, tl, g.traits, crng);
                s.channels[kind] = std::move(sig);
                g.beat_times = std::move(beats);
                break;
            }
            case ChannelKind::EDA: s.channels[kind] = detail::make_eda(t0, t_end, tl, g.traits, crng); break;
            case ChannelKind::EEG_RAW: s.channels[kind] = detail::make_eeg(t0, t_end, tl, g.traits, crng); break;
            case ChannelKind::ATTENTION:
            case ChannelKind::MEDITATION:
                s.channels[kind] = detail::make_esense(kind, t0, t_end, tl, g.traits, crng);
                break;
        }
    }
    return g;
}

struct CorpusSummary {
    int participants = 0;
    std::size_t events = 0;
    std::size_t answered = 0;
    std::size_t code = 0;
    std::size_t prose = 0;

    nlohmann::json to_json() const {
        return {{"participants", participants}, {"events", events}, {"answered", answered}, {"code", code}, {"prose", prose}};
    }
};

/// Writes one directory per participant under root. Existing session
/// directories with the same names are overwritten.
inline CorpusSummary generate_corpus(const SynthConfig& cfg, const std::filesystem::path& root) {
    cfg.validate();
    std::filesystem::create_directories(root);
    CorpusSummary sum;
    sum.participants = cfg.n_participants;
    for (int i = 0; i < cfg.n_participants; ++i) {
        const auto g = generate_session(cfg, i);
        for (const auto& e : g.session.events) {
            ++sum.events;
            sum.answered += e.answered();
            (e.kind == TaskKind::CODE ? sum.code : sum.prose)++;
        }
        write_session(root / g.session.participant.id, g.session);
    }
    return sum;
}

inline void from_json(const nlohmann::json& j, ClassProfile& p) {
    p.hr_bpm = j.value("hr_bpm", p.hr_bpm);
    p.hr_jitter_bpm = j.value("hr_jitter_bpm", p.hr_jitter_bpm);
    p.ibi_sd_s = j.value("ibi_sd_s", p.ibi_sd_s);
    p.bvp_amp = j.value("bvp_amp", p.bvp_amp);
    p.scr_rate_per_min = j.value("scr_rate_per_min", p.scr_rate_per_min);
    p.scr_amp = j.value("scr_amp", p.scr_amp);
    if (j.contains("band_weights")) {
        const auto w = j.at("band_weights").get<std::vector<double>>();
        if (w.size() != 5) throw SynthError("band_weights must have 5 entries");
        std::copy(w.begin(), w.end(), p.band_weights.begin());
    }
    p.attention_mean = j.value("attention_mean", p.attention_mean);
    p.meditation_mean = j.value("meditation_mean", p.meditation_mean);
    p.latency_min_s = j.value("latency_min_s", p.latency_min_s);
    p.latency_max_s = j.value("latency_max_s", p.latency_max_s);
}

inline void to_json(nlohmann::json& j, const ClassProfile& p) {
    j = {{"hr_bpm", p.hr_bpm},
         {"hr_jitter_bpm", p.hr_jitter_bpm},
         {"ibi_sd_s", p.ibi_sd_s},
         {"bvp_amp", p.bvp_amp},
         {"scr_rate_per_min", p.scr_rate_per_min},
         {"scr_amp", p.scr_amp},
         {"band_weights", p.band_weights},
         {"attention_mean", p.attention_mean},
         {"meditation_mean", p.meditation_mean},
         {"latency_min_s", p.latency_min_s},
         {"latency_max_s", p.latency_max_s}};
}

/// Reads the "synth" config object on top of `base`; unknown keys are ignored.
/// A "preset" (null, separable, gpa_linked) replaces the base before other keys apply.
inline SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig cfg = {}) {
    try {
        if (j.contains("preset")) {
            const auto name = j.at("preset").get<std::string>();
            if (name == "null") cfg = null_config(cfg.seed);
            else if (name == "separable") cfg = separable_config(cfg.seed);
            else if (name == "gpa_linked") cfg = gpa_linked_config(cfg.seed);
            else throw SynthError("unknown synth preset '" + name + "'");
        }
        cfg.n_participants = j.value("n_participants", cfg.n_participants);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.sessions = j.value("sessions", cfg.sessions);
        cfg.code_per_session = j.value("code_per_session", cfg.code_per_session);
        cfg.prose_per_session = j.value("prose_per_session", cfg.prose_per_session);
        cfg.unanswered_prob = j.value("unanswered_prob", cfg.unanswered_prob);
        cfg.gpa_mean = j.value("gpa_mean", cfg.gpa_mean);
        cfg.gpa_sd = j.value("gpa_sd", cfg.gpa_sd);
        cfg.gpa_linked_effect = j.value("gpa_linked_effect", cfg.gpa_linked_effect);
        if (j.contains("channels")) {
            cfg.channels.clear();
            for (const auto& c : j.at("channels")) {
                const auto k = parse_channel_kind(c.get<std::string>());
                if (!k) throw SynthError("unknown channel " + c.get<std::string>());
                cfg.channels.insert(*k);
            }
        }
        if (j.contains("profiles")) {
            const auto& p = j.at("profiles");
            if (p.contains("code")) from_json(p.at("code"), cfg.code);
            if (p.contains("prose")) from_json(p.at("prose"), cfg.prose);
            if (p.contains("rest")) from_json(p.at("rest"), cfg.rest);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SynthError(std::string("synth config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

}  // namespace biocomp::synth
