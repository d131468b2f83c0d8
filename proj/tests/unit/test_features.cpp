#include <cmath>

#include <gtest/gtest.h>

#include "biocomp/features.hpp"
#include "biocomp/synth.hpp"
#include "helpers.hpp"

using namespace biocomp;

namespace {

// Gaussian pulses centred on the given sample indices.
SampledSignal pulse_train(const std::vector<std::size_t>& centres, std::size_t n, double amp = 1.0) {
    SampledSignal s{ChannelKind::BVP, 64.0, 0.0, std::vector<double>(n, 0.0)};
    for (auto c : centres)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (static_cast<double>(i) - static_cast<double>(c)) / 3.0;
            s.values[i] += amp * std::exp(-0.5 * d * d);
        }
    return s;
}

}  // namespace

TEST(Registry, SizesPerConfiguration) {
    EXPECT_EQ(registry(SignalConfig::EEG).size(), 31u);
    EXPECT_EQ(registry(SignalConfig::EDA).size(), 6u);
    EXPECT_EQ(registry(SignalConfig::HEART).size(), 9u);
    EXPECT_EQ(registry(SignalConfig::EEG_EDA).size(), 37u);
    EXPECT_EQ(registry(SignalConfig::EEG_HEART).size(), 40u);
    EXPECT_EQ(registry(SignalConfig::EDA_HEART).size(), 15u);
    EXPECT_EQ(registry(SignalConfig::EEG_EDA_HEART).size(), 46u);
}

TEST(Registry, NamesRoundTrip) {
    for (auto c : kAllConfigs) EXPECT_EQ(parse_config(config_name(c)), c);
    EXPECT_EQ(parse_config("eda+heart"), SignalConfig::EDA_HEART);
    EXPECT_EQ(parse_config("HEART+EDA"), SignalConfig::EDA_HEART);
    EXPECT_FALSE(parse_config("EMG").has_value());
    const auto names = registry(SignalConfig::EEG_EDA_HEART);
    EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
}

TEST(Hrv, ConstantIntervalsHaveZeroVariability) {
    const std::vector<double> ibi(10, 0.8);
    EXPECT_EQ(sdnn(ibi), 0.0);
    EXPECT_EQ(rmssd(ibi), 0.0);
}

TEST(Hrv, RmssdHandExample) {
    const std::vector<double> ibi{0.8, 1.0, 0.8};
    EXPECT_DOUBLE_EQ(rmssd(ibi), 0.2);
    EXPECT_NEAR(sdnn(ibi), std::sqrt((2 * 0.2 * 0.2 / 9 + 0.4 * 0.4 / 9) / 2), 1e-15);
    EXPECT_THROW(rmssd(std::vector<double>{0.8}), FeatureError);
}

TEST(Eda, TriangleAreaMatchesAnalytic) {
    // Triangle of height 2 over 10 s on a 4 Hz grid, non-aligned apex.
    SampledSignal ph{ChannelKind::EDA, 4.0, 0.0, {}};
    for (int i = 0; i <= 80; ++i) {
        const double t = i / 4.0;
        ph.values.push_back(t < 5 ? 0.0 : t < 8.3 ? 2.0 * (t - 5) / 3.3 : t < 15 ? 2.0 * (15 - t) / 6.7 : 0.0);
    }
    EXPECT_NEAR(trapezoid(ph), 10.0, 0.1);
    const auto tonic = testing_support::constant(ChannelKind::EDA, 4.0, 3.0, 20.25);
    const auto f = eda_features(tonic, ph);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_DOUBLE_EQ(*f[0], 3.0);
    EXPECT_NEAR(*f[1], 10.0, 0.1);
    EXPECT_NEAR(*f[3], 2.0, 0.05);
}

TEST(Eda, NoPeaksGiveZeros) {
    const auto flat = testing_support::constant(ChannelKind::EDA, 4.0, 0.0, 10.0);
    const auto f = eda_features(flat, flat);
    for (std::size_t i = 2; i < 6; ++i) EXPECT_EQ(*f[i], 0.0);
}

TEST(Heart, PulseTrainIntervals) {
    const auto bvp = pulse_train({32, 96, 160, 224, 288}, 320);
    const auto h = heart_summary(bvp);
    ASSERT_EQ(h.peaks.size(), 5u);
    for (double v : h.ibi) EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_DOUBLE_EQ(*h.mean_hr, 60.0);
    EXPECT_DOUBLE_EQ(*h.var_hr, 0.0);
}

TEST(Heart, FeaturesAgainstBaseline) {
    const auto base = heart_summary(pulse_train({32, 96, 160, 224, 288}, 320));
    // Intervals 0.75, 1.0, 0.75 s: HR 80, 60, 80.
    const auto f = heart_features(pulse_train({20, 68, 132, 180}, 220, 2.0), base);
    ASSERT_EQ(f.size(), 9u);
    EXPECT_NEAR(*f[0], 2.0, 1e-9);
    EXPECT_NEAR(*f[3], 8.0, 1e-9);
    EXPECT_NEAR(*f[4], 1.0, 1e-9);
    EXPECT_NEAR(*f[5], 220.0 / 3.0 - 60.0, 1e-9);
    EXPECT_NEAR(*f[6], 800.0 / 9.0, 1e-9);
    EXPECT_NEAR(*f[8], 0.25, 1e-12);
}

TEST(Heart, TooFewBeatsAreMissing) {
    const auto base = heart_summary(pulse_train({32, 96, 160}, 200));
    const auto f = heart_features(pulse_train({40}, 100), base);
    EXPECT_DOUBLE_EQ(*f[0], 1.0);
    EXPECT_FALSE(f[5].has_value());
    EXPECT_FALSE(f[7].has_value());
    EXPECT_FALSE(f[8].has_value());
}

TEST(Eeg, PowersAndRatios) {
    EegBands b;
    for (std::size_t i = 0; i < 5; ++i)
        b.bands[i] = testing_support::constant(ChannelKind::EEG_RAW, 512.0, static_cast<double>(i + 1), 1.0);
    SampledSignal att{ChannelKind::ATTENTION, 1.0, 0.0, {40, 60, 50}};
    SampledSignal med{ChannelKind::MEDITATION, 1.0, 0.0, {10, 20, 30}};
    const auto f = eeg_features(b, att, med, 45.0, 25.0);
    ASSERT_EQ(f.size(), 31u);
    EXPECT_DOUBLE_EQ(*f[0], 1.0);
    EXPECT_DOUBLE_EQ(*f[4], 25.0);
    EXPECT_NEAR(*f[5], 1.0 / 4.0, 1e-12);  // delta / theta
    EXPECT_EQ(*f[25], 40.0);
    EXPECT_EQ(*f[26], 60.0);
    EXPECT_DOUBLE_EQ(*f[27], 5.0);
    EXPECT_DOUBLE_EQ(*f[30], -5.0);
}

TEST(Impute, OwnThenGlobalMedian) {
    FeatureMatrix m;
    m.names = {"hrv_sdnn"};
    m.rows = {{"A", "1", TaskKind::CODE, {1.0}},  {"A", "2", TaskKind::CODE, {3.0}},
              {"A", "3", TaskKind::CODE, {std::nullopt}},     {"B", "1", TaskKind::CODE, {std::nullopt}},
              {"B", "2", TaskKind::PROSE, {7.0}}, {"C", "1", TaskKind::CODE, {10.0}}};
    const auto out = impute(m);
    EXPECT_TRUE(out.complete());
    EXPECT_DOUBLE_EQ(*out.rows[2].values[0], 2.0);
    EXPECT_DOUBLE_EQ(*out.rows[3].values[0], 3.0);
}

TEST(Impute, NonImputableOrUnavailableRaises) {
    FeatureMatrix m;
    m.names = {"eda_tonic_mean"};
    m.rows = {{"A", "1", TaskKind::CODE, {std::nullopt}}, {"A", "2", TaskKind::CODE, {1.0}}};
    EXPECT_THROW(impute(m), ImputationError);
    m.names = {"hrv_rmssd"};
    m.rows = {{"A", "1", TaskKind::CODE, {std::nullopt}}, {"A", "2", TaskKind::PROSE, {1.0}}};
    EXPECT_THROW(impute(m), ImputationError);
    m.rows = {{"A", "1", TaskKind::CODE, {}}};
    EXPECT_THROW(impute(m), FeatureError);
}

TEST(Extraction, SynthSessionGivesCompleteMatrices) {
    synth::SynthConfig cfg;
    cfg.n_participants = 2;
    const auto s = synth::generate_session(cfg, 1).session;
    const auto sf = extract_session_features(s, kGroupEEG | kGroupEDA | kGroupHeart);
    EXPECT_EQ(sf.tasks.size(), 27u);
    for (auto c : kAllConfigs) {
        const auto m = assemble_matrix({sf}, c);
        EXPECT_EQ(m.rows.size(), 27u);
        EXPECT_EQ(m.cols(), registry(c).size());
        EXPECT_TRUE(m.complete());
    }
}

TEST(Extraction, MissingChannelRaises) {
    synth::SynthConfig cfg;
    cfg.n_participants = 2;
    cfg.channels = {ChannelKind::BVP};
    const auto s = synth::generate_session(cfg, 0).session;
    EXPECT_NO_THROW(extract_session_features(s, kGroupHeart));
    EXPECT_THROW(extract_session_features(s, kGroupEEG), MissingChannelError);
    const auto sf = extract_session_features(s, kGroupHeart);
    EXPECT_THROW(assemble_matrix({sf}, SignalConfig::EDA_HEART), MissingChannelError);
}

TEST(Extraction, UnansweredTasksProduceNoRows) {
    synth::SynthConfig cfg;
    cfg.n_participants = 2;
    cfg.unanswered_prob = 0.3;
    cfg.channels = {ChannelKind::BVP};
    const auto s = synth::generate_session(cfg, 0).session;
    const auto answered = std::count_if(s.events.begin(), s.events.end(), [](const auto& e) { return e.answered(); });
    ASSERT_LT(answered, 27);
    const auto m = assemble_matrix({extract_session_features(s, kGroupHeart)}, SignalConfig::HEART);
    EXPECT_EQ(static_cast<long>(m.rows.size()), answered);
}

TEST(Csv, HeaderAndMissingValues) {
    FeatureMatrix m;
    m.names = {"a", "b"};
    m.rows = {{"P1", "t1", TaskKind::CODE, {0.5, std::nullopt}}};
    EXPECT_EQ(to_csv(m), "participant_id,task_id,label,a,b\nP1,t1,CODE,0.5,NA\n");
}
