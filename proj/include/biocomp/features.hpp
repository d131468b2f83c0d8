#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biocomp/cvxeda.hpp"
#include "biocomp/error.hpp"
#include "biocomp/ingest.hpp"
#include "biocomp/peaks.hpp"
#include "biocomp/preprocess.hpp"
#include "biocomp/segment.hpp"
#include "biocomp/signal.hpp"

namespace biocomp {

using FeatureValue = std::optional<double>;  // nullopt = MISSING

/// Sensor groups; a signal configuration is a nonempty union of them.
enum SignalGroup : unsigned { kGroupEEG = 1u, kGroupEDA = 2u, kGroupHeart = 4u };

enum class SignalConfig : unsigned {
    EEG = kGroupEEG,
    EDA = kGroupEDA,
    HEART = kGroupHeart,
    EEG_EDA = kGroupEEG | kGroupEDA,
    EEG_HEART = kGroupEEG | kGroupHeart,
    EDA_HEART = kGroupEDA | kGroupHeart,
    EEG_EDA_HEART = kGroupEEG | kGroupEDA | kGroupHeart,
};

inline constexpr std::array<SignalConfig, 7> kAllConfigs{
    SignalConfig::EEG,       SignalConfig::EDA,       SignalConfig::HEART,        SignalConfig::EEG_EDA,
    SignalConfig::EEG_HEART, SignalConfig::EDA_HEART, SignalConfig::EEG_EDA_HEART};

constexpr unsigned groups_of(SignalConfig c) noexcept { return static_cast<unsigned>(c); }
constexpr bool has_group(SignalConfig c, SignalGroup g) noexcept { return (groups_of(c) & g) != 0; }

inline std::string config_name(SignalConfig c) {
    std::string out;
    auto add = [&](const char* s) {
        if (!out.empty()) out += '+';
        out += s;
    };
    if (has_group(c, kGroupEEG)) add("EEG");
    if (has_group(c, kGroupEDA)) add("EDA");
    if (has_group(c, kGroupHeart)) add("HEART");
    return out;
}

/// Accepts names like "EEG+EDA", case-insensitive, in any member order.
inline std::optional<SignalConfig> parse_config(std::string_view name) {
    unsigned mask = 0;
    while (!name.empty()) {
        const auto plus = name.find('+');
        std::string part(detail::trim(name.substr(0, plus)));
        part = detail::upper(part);
        if (part == "EEG") mask |= kGroupEEG;
        else if (part == "EDA") mask |= kGroupEDA;
        else if (part == "HEART") mask |= kGroupHeart;
        else return std::nullopt;
        if (plus == std::string_view::npos) break;
        name.remove_prefix(plus + 1);
    }
    if (mask == 0) return std::nullopt;
    return static_cast<SignalConfig>(mask);
}

inline std::vector<std::string> eeg_feature_names() {
    std::vector<std::string> out;
    for (auto b : kEegBands) out.push_back(std::string("eeg_power_") + band_name(b));
    for (auto a : kEegBands)
        for (auto b : kEegBands)
            if (a != b) out.push_back(std::string("eeg_ratio_") + band_name(a) + "_" + band_name(b));
    for (const char* s : {"attention", "meditation"}) {
        out.push_back(std::string(s) + "_min");
        out.push_back(std::string(s) + "_max");
        out.push_back(std::string(s) + "_delta_mean");
    }
    return out;
}

inline std::vector<std::string> eda_feature_names() {
    return {"eda_tonic_mean", "eda_phasic_auc", "eda_peak_min", "eda_peak_max", "eda_peak_mean", "eda_peak_sum"};
}

inline std::vector<std::string> heart_feature_names() {
    return {"bvp_peak_min",  "bvp_peak_max", "bvp_peak_mean", "bvp_peak_sum", "bvp_delta_mean_peak",
            "hr_delta_mean", "hr_delta_var", "hrv_sdnn",      "hrv_rmssd"};
}

/// Features allowed to be MISSING before imputation.
inline const std::set<std::string>& imputable_features() {
    static const std::set<std::string> s{"bvp_delta_mean_peak", "hr_delta_mean", "hr_delta_var", "hrv_sdnn",
                                         "hrv_rmssd"};
    return s;
}

inline std::vector<std::string> registry(SignalConfig c) {
    std::vector<std::string> out;
    auto append = [&](std::vector<std::string> v) { out.insert(out.end(), v.begin(), v.end()); };
    if (has_group(c, kGroupEEG)) append(eeg_feature_names());
    if (has_group(c, kGroupEDA)) append(eda_feature_names());
    if (has_group(c, kGroupHeart)) append(heart_feature_names());
    return out;
}

struct FeatureParams {
    PeakParams scr{1.0, 0.01};
    double bvp_min_distance_s = 0.33;
    double bvp_prominence_factor = 0.5;  // times the window's standard deviation
    CvxEdaParams cvxeda;
};

inline constexpr double kRatioEpsilon = 1e-12;

namespace detail {

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sum of squared deviations, shifted by the first value so constant input gives exactly 0.
inline double squared_deviations(std::span<const double> v) {
    const double k = v.front();
    double s = 0.0;
    for (double x : v) s += x - k;
    const double m = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - k - m) * (x - k - m);
    return ss;
}

inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt(squared_deviations(v) / static_cast<double>(v.size() - 1));
}

inline double population_var(std::span<const double> v) {
    return squared_deviations(v) / static_cast<double>(v.size());
}

inline void require_nonempty(const SampledSignal& s, const char* what) {
    if (s.empty()) throw FeatureError(std::string(what) + " window is empty");
}

inline void append_peak_stats(std::vector<FeatureValue>& out, const std::vector<Peak>& peaks) {
    if (peaks.empty()) {
        out.insert(out.end(), {0.0, 0.0, 0.0, 0.0});
        return;
    }
    double lo = peaks.front().amplitude, hi = lo, sum = 0.0;
    for (const auto& p : peaks) {
        lo = std::min(lo, p.amplitude);
        hi = std::max(hi, p.amplitude);
        sum += p.amplitude;
    }
    out.insert(out.end(), {lo, hi, sum / static_cast<double>(peaks.size()), sum});
}

}  // namespace detail

inline double mean_power(const SampledSignal& s) {
    double acc = 0.0;
    for (double v : s.values) acc += v * v;
    return acc / static_cast<double>(s.size());
}

/// Band slices, attention and meditation slices for one window. Attention and
/// meditation are compared against their raw baseline means.
inline std::vector<FeatureValue> eeg_features(const EegBands& bands, const SampledSignal& attention,
                                              const SampledSignal& meditation, double attention_baseline_mean,
                                              double meditation_baseline_mean) {
    for (const auto& b : bands.bands) detail::require_nonempty(b, "EEG band");
    detail::require_nonempty(attention, "attention");
    detail::require_nonempty(meditation, "meditation");
    std::vector<FeatureValue> out;
    out.reserve(31);
    std::array<double, 5> power{};
    for (std::size_t i = 0; i < 5; ++i) {
        power[i] = mean_power(bands.bands[i]);
        out.push_back(power[i]);
    }
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b)
            if (a != b) out.push_back(power[a] / (power[b] + kRatioEpsilon));
    auto scalar = [&](const SampledSignal& s, double base) {
        const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
        out.push_back(*lo);
        out.push_back(*hi);
        out.push_back(detail::mean_of(s.values) - base);
    };
    scalar(attention, attention_baseline_mean);
    scalar(meditation, meditation_baseline_mean);
    return out;
}

inline double trapezoid(const SampledSignal& s) {
    if (s.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) acc += 0.5 * (s.values[i - 1] + s.values[i]);
    return acc / s.sample_rate;
}

inline std::vector<FeatureValue> eda_features(const SampledSignal& tonic, const SampledSignal& phasic,
                                              const PeakParams& scr = {1.0, 0.01}) {
    detail::require_nonempty(tonic, "tonic");
    detail::require_nonempty(phasic, "phasic");
    std::vector<FeatureValue> out{detail::mean_of(tonic.values), trapezoid(phasic)};
    detail::append_peak_stats(out, detect_peaks(phasic, scr));
    return out;
}

/// Beat statistics of one BVP segment, shared by task windows and the baseline.
struct HeartSummary {
    std::vector<Peak> peaks;
    std::vector<double> ibi;  // seconds
    std::optional<double> mean_peak;
    std::optional<double> mean_hr;
    std::optional<double> var_hr;
};

inline HeartSummary heart_summary(const SampledSignal& bvp, const FeatureParams& p = {}) {
    HeartSummary h;
    const PeakParams pp{p.bvp_min_distance_s, p.bvp_prominence_factor * detail::sample_std(bvp.values)};
    h.peaks = detect_peaks(bvp, pp);
    if (!h.peaks.empty()) {
        double s = 0.0;
        for (const auto& pk : h.peaks) s += pk.amplitude;
        h.mean_peak = s / static_cast<double>(h.peaks.size());
    }
    for (std::size_t i = 1; i < h.peaks.size(); ++i)
        h.ibi.push_back(static_cast<double>(h.peaks[i].index - h.peaks[i - 1].index) / bvp.sample_rate);
    if (!h.ibi.empty()) {
        std::vector<double> hr;
        hr.reserve(h.ibi.size());
        for (double v : h.ibi) hr.push_back(60.0 / v);
        h.mean_hr = detail::mean_of(hr);
        h.var_hr = detail::population_var(hr);
    }
    return h;
}

inline double sdnn(std::span<const double> ibi) {
    if (ibi.size() < 2) throw FeatureError("SDNN needs at least 2 inter-beat intervals");
    return detail::sample_std(ibi);
}

inline double rmssd(std::span<const double> ibi) {
    if (ibi.size() < 2) throw FeatureError("RMSSD needs at least 2 inter-beat intervals");
    double acc = 0.0;
    for (std::size_t i = 1; i < ibi.size(); ++i) acc += (ibi[i] - ibi[i - 1]) * (ibi[i] - ibi[i - 1]);
    return std::sqrt(acc / static_cast<double>(ibi.size() - 1));
}

inline std::vector<FeatureValue> heart_features(const SampledSignal& bvp, const HeartSummary& baseline,
                                                const FeatureParams& p = {}) {
    detail::require_nonempty(bvp, "BVP");
    const auto h = heart_summary(bvp, p);
    std::vector<FeatureValue> out;
    out.reserve(9);
    detail::append_peak_stats(out, h.peaks);
    auto diff = [](const std::optional<double>& a, const std::optional<double>& b) -> FeatureValue {
        if (a && b) return *a - *b;
        return std::nullopt;
    };
    out.push_back(diff(h.mean_peak, baseline.mean_peak));
    out.push_back(diff(h.mean_hr, baseline.mean_hr));
    out.push_back(diff(h.var_hr, baseline.var_hr));
    if (h.ibi.size() >= 2) {
        out.push_back(sdnn(h.ibi));
        out.push_back(rmssd(h.ibi));
    } else {
        out.push_back(std::nullopt);
        out.push_back(std::nullopt);
    }
    return out;
}

struct FeatureRow {
    std::string participant_id;
    std::string task_id;
    TaskKind label = TaskKind::PROSE;
    std::vector<FeatureValue> values;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<FeatureRow> rows;

    std::size_t cols() const noexcept { return names.size(); }

    std::size_t column(std::string_view name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw FeatureError("no feature named " + std::string(name));
        return static_cast<std::size_t>(it - names.begin());
    }

    bool complete() const {
        for (const auto& r : rows)
            for (const auto& v : r.values)
                if (!v) return false;
        return true;
    }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

namespace detail {

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Fills MISSING values with the median over the same participant's tasks of
/// the same kind, falling back to the median over all tasks of that kind.
inline FeatureMatrix impute(const FeatureMatrix& m) {
    for (const auto& r : m.rows)
        if (r.values.size() != m.cols())
            throw FeatureError("row " + r.participant_id + "/" + r.task_id + " has the wrong number of values");
    FeatureMatrix out = m;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        bool any_missing = false;
        for (const auto& r : m.rows) any_missing = any_missing || !r.values[c];
        if (!any_missing) continue;
        if (!imputable_features().contains(m.names[c]))
            throw ImputationError("feature " + m.names[c] + " has missing values but is not imputable");
        std::map<std::pair<std::string, TaskKind>, std::vector<double>> own;
        std::map<TaskKind, std::vector<double>> global;
        for (const auto& r : m.rows) {
            if (!r.values[c]) continue;
            own[{r.participant_id, r.label}].push_back(*r.values[c]);
            global[r.label].push_back(*r.values[c]);
        }
        std::map<std::pair<std::string, TaskKind>, double> own_median;
        for (auto& [k, v] : own) own_median[k] = detail::median_of(v);
        std::map<TaskKind, double> global_median;
        for (auto& [k, v] : global) global_median[k] = detail::median_of(v);
        for (auto& r : out.rows) {
            if (r.values[c]) continue;
            if (auto it = own_median.find({r.participant_id, r.label}); it != own_median.end())
                r.values[c] = it->second;
            else if (auto g = global_median.find(r.label); g != global_median.end())
                r.values[c] = g->second;
            else
                throw ImputationError("feature " + m.names[c] + " is missing for every " +
                                      std::string(task_kind_name(r.label)) + " task");
        }
    }
    return out;
}

/// Per-task features of one session, grouped by sensor group.
struct TaskFeatures {
    std::string task_id;
    TaskKind label = TaskKind::PROSE;
    std::optional<std::vector<FeatureValue>> eeg, eda, heart;
};

struct SessionFeatures {
    std::string participant_id;
    unsigned groups = 0;
    std::vector<TaskFeatures> tasks;
    std::vector<std::string> warnings;
};

inline std::vector<ChannelKind> required_channels(unsigned groups) {
    std::vector<ChannelKind> out;
    if (groups & kGroupEEG) out.insert(out.end(), {ChannelKind::EEG_RAW, ChannelKind::ATTENTION, ChannelKind::MEDITATION});
    if (groups & kGroupEDA) out.push_back(ChannelKind::EDA);
    if (groups & kGroupHeart) out.push_back(ChannelKind::BVP);
    return out;
}

/// Preprocesses one session and computes the requested feature groups for
/// every answered task.
inline SessionFeatures extract_session_features(const Session& session, unsigned groups,
                                                const FeatureParams& params = {}) {
    SessionFeatures sf;
    sf.participant_id = session.participant.id;
    sf.groups = groups;
    for (auto k : required_channels(groups))
        if (!session.has(k))
            throw MissingChannelError("session " + session.participant.id + " has no " +
                                      std::string(channel_name(k)) + " channel");

    const double b1 = session.baseline_end;
    const double b0 = b1 - kBaselineSeconds;
    auto baseline = [&](ChannelKind k) { return channel_baseline(session.channel(k), b0, b1); };

    const auto schedule = compute_schedule(session);
    sf.warnings = schedule.warnings;
    for (const auto& w : schedule.windows) sf.tasks.push_back({w.task_id, w.kind, {}, {}, {}});
    if (schedule.windows.empty()) return sf;

    if (groups & kGroupHeart) {
        const auto& raw = session.channel(ChannelKind::BVP);
        const auto bvp = bandpass(zscore(raw, baseline(ChannelKind::BVP)), kBvpBand.low, kBvpBand.high);
        const auto base = heart_summary(slice_time(bvp, b0, b1), params);
        for (std::size_t i = 0; i < schedule.windows.size(); ++i)
            sf.tasks[i].heart = heart_features(slice(bvp, schedule.windows[i]), base, params);
    }
    if (groups & kGroupEDA) {
        const auto& raw = session.channel(ChannelKind::EDA);
        const auto dec = decompose_eda(zscore(raw, baseline(ChannelKind::EDA)), params.cvxeda);
        const auto& tonic = dec.tonic;
        const auto& phasic = dec.phasic;
        for (std::size_t i = 0; i < schedule.windows.size(); ++i) {
            const auto& w = schedule.windows[i];
            sf.tasks[i].eda = eda_features(slice(tonic, w), slice(phasic, w), params.scr);
        }
    }
    if (groups & kGroupEEG) {
        const auto& raw = session.channel(ChannelKind::EEG_RAW);
        const auto bands = eeg_band_split(zscore(raw, baseline(ChannelKind::EEG_RAW)));
        const auto& att = session.channel(ChannelKind::ATTENTION);
        const auto& med = session.channel(ChannelKind::MEDITATION);
        const double att_base = baseline(ChannelKind::ATTENTION).mean;
        const double med_base = baseline(ChannelKind::MEDITATION).mean;
        for (std::size_t i = 0; i < schedule.windows.size(); ++i) {
            const auto& w = schedule.windows[i];
            EegBands win;
            for (auto b : kEegBands) win[b] = slice(bands[b], w);
            sf.tasks[i].eeg = eeg_features(win, slice(att, w), slice(med, w), att_base, med_base);
        }
    }
    return sf;
}

/// Rows for one configuration, in session order then task order, imputed.
inline FeatureMatrix assemble_matrix(const std::vector<SessionFeatures>& sessions, SignalConfig config) {
    FeatureMatrix m;
    m.names = registry(config);
    const unsigned need = groups_of(config);
    for (const auto& sf : sessions) {
        if ((sf.groups & need) != need)
            throw MissingChannelError("features for " + sf.participant_id + " lack groups needed by " +
                                      config_name(config));
        for (const auto& t : sf.tasks) {
            FeatureRow row{sf.participant_id, t.task_id, t.label, {}};
            row.values.reserve(m.names.size());
            auto add = [&](const std::optional<std::vector<FeatureValue>>& g) {
                row.values.insert(row.values.end(), g->begin(), g->end());
            };
            if (need & kGroupEEG) add(t.eeg);
            if (need & kGroupEDA) add(t.eda);
            if (need & kGroupHeart) add(t.heart);
            m.rows.push_back(std::move(row));
        }
    }
    return impute(m);
}

inline FeatureMatrix build_matrix(const std::vector<Session>& corpus, SignalConfig config,
                                  const FeatureParams& params = {}) {
    std::vector<SessionFeatures> sf;
    sf.reserve(corpus.size());
    for (const auto& s : corpus) sf.push_back(extract_session_features(s, groups_of(config), params));
    return assemble_matrix(sf, config);
}

inline std::string to_csv(const FeatureMatrix& m) {
    std::string out = "participant_id,task_id,label";
    for (const auto& n : m.names) out += "," + n;
    out += '\n';
    for (const auto& r : m.rows) {
        out += r.participant_id + "," + r.task_id + "," + std::string(task_kind_name(r.label));
        for (const auto& v : r.values) {
            out += ',';
            if (v)
                detail::append_real(out, *v);
            else
                out += "NA";
        }
        out += '\n';
    }
    return out;
}

inline void write_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    const auto text = to_csv(m);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace biocomp
