#include <gtest/gtest.h>

#include "biocomp/peaks.hpp"

using namespace biocomp;

TEST(Peaks, LocalMaximaWithPlateau) {
    const std::vector<double> x{0, 1, 0, 2, 2, 2, 0, 3, 3, 0, 1};
    EXPECT_EQ(local_maxima(x), (std::vector<std::size_t>{1, 4, 7}));
}

TEST(Peaks, EdgesAreNotPeaks) {
    const std::vector<double> x{5, 1, 2, 1, 6};
    EXPECT_EQ(local_maxima(x), (std::vector<std::size_t>{2}));
}

TEST(Peaks, ProminenceAgainstHigherNeighbours) {
    const std::vector<double> x{0, 5, 1, 3, 2, 4, 0};
    EXPECT_DOUBLE_EQ(prominence(x, 1), 5.0);
    EXPECT_DOUBLE_EQ(prominence(x, 3), 1.0);
    EXPECT_DOUBLE_EQ(prominence(x, 5), 3.0);
}

TEST(Peaks, ProminenceFilter) {
    const std::vector<double> x{0, 5, 1, 3, 2, 4, 0};
    const auto p = detect_peaks(x, 1.0, PeakParams{0.0, 2.0});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].index, 1u);
    EXPECT_EQ(p[1].index, 5u);
    EXPECT_DOUBLE_EQ(p[1].amplitude, 4.0);
}

TEST(Peaks, DistanceKeepsTallerPeak) {
    const std::vector<double> x{0, 2, 0, 3, 0, 0, 0, 1, 0};
    const auto p = detect_peaks(x, 1.0, PeakParams{3.0, 0.0});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].index, 3u);
    EXPECT_EQ(p[1].index, 7u);
}

TEST(Peaks, DistanceScalesWithRate) {
    std::vector<double> x(64, 0.0);
    x[10] = 1.0;
    x[20] = 0.9;
    x[40] = 0.8;
    EXPECT_EQ(detect_peaks(x, 64.0, PeakParams{0.2, 0.0}).size(), 2u);
    EXPECT_EQ(detect_peaks(x, 64.0, PeakParams{0.1, 0.0}).size(), 3u);
}

TEST(Peaks, EqualHeightsEarlierWins) {
    const std::vector<double> x{0, 1, 0, 1, 0};
    const auto p = detect_peaks(x, 1.0, PeakParams{3.0, 0.0});
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].index, 1u);
}
