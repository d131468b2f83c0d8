#include <array>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "biocomp/learn/correlation.hpp"
#include "biocomp/learn/metrics.hpp"

using namespace biocomp;
using namespace biocomp::learn;

TEST(Confusion, CountsPerCell) {
    const std::vector<int> truth{1, 1, 1, 0, 0, 0, 0};
    const std::vector<int> pred{1, 0, 1, 1, 0, 0, 0};
    const auto c = confusion(truth, pred);
    EXPECT_EQ(c.tp, 2);
    EXPECT_EQ(c.fn, 1);
    EXPECT_EQ(c.fp, 1);
    EXPECT_EQ(c.tn, 3);
    EXPECT_EQ(c.total(), 7);
}

TEST(BalancedAccuracy, HandComputed) {
    EXPECT_DOUBLE_EQ(*balanced_accuracy({2, 1, 1, 3}), (2.0 / 3.0 + 3.0 / 4.0) / 2.0);
    EXPECT_DOUBLE_EQ(*balanced_accuracy({5, 0, 0, 5}), 1.0);
    EXPECT_DOUBLE_EQ(*balanced_accuracy({0, 9, 0, 18}), 0.5);
    EXPECT_FALSE(balanced_accuracy({3, 1, 0, 0}).has_value());
    EXPECT_FALSE(balanced_accuracy({0, 0, 2, 5}).has_value());
}

TEST(MacroMetrics, HandComputed) {
    const auto m = *macro_metrics({2, 1, 1, 3});
    const double p_pos = 2.0 / 3.0, r_pos = 2.0 / 3.0, p_neg = 3.0 / 4.0, r_neg = 3.0 / 4.0;
    EXPECT_DOUBLE_EQ(m.precision, (p_pos + p_neg) / 2.0);
    EXPECT_DOUBLE_EQ(m.recall, (r_pos + r_neg) / 2.0);
    EXPECT_DOUBLE_EQ(m.f1, (2 * p_pos * r_pos / (p_pos + r_pos) + 2 * p_neg * r_neg / (p_neg + r_neg)) / 2.0);
}

TEST(MacroMetrics, NeverPredictedClassScoresZero) {
    const auto m = *macro_metrics({0, 3, 0, 6});
    EXPECT_DOUBLE_EQ(m.precision, (0.0 + 6.0 / 9.0) / 2.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.5);
    EXPECT_DOUBLE_EQ(m.f1, (0.0 + 2 * (6.0 / 9.0) / (6.0 / 9.0 + 1.0)) / 2.0);
}

TEST(MacroMetrics, SymmetricUnderLabelSwap) {
    const Confusion c{4, 2, 1, 7};
    const auto a = *macro_metrics(c), b = *macro_metrics(c.swapped());
    EXPECT_DOUBLE_EQ(a.precision, b.precision);
    EXPECT_DOUBLE_EQ(a.f1, b.f1);
    EXPECT_DOUBLE_EQ(*balanced_accuracy(c), *balanced_accuracy(c.swapped()));
}

namespace {

struct Brute {
    double tau, p;
};

// O(n^2) pair enumeration with the tie-corrected normal approximation.
Brute brute_kendall(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double s = 0, n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            s += ((dx > 0) - (dx < 0)) * ((dy > 0) - (dy < 0));
            n1 += dx == 0;
            n2 += dy == 0;
        }
    const double nd = static_cast<double>(n), n0 = nd * (nd - 1) / 2;
    auto ties = [](std::vector<double> v) {
        std::map<double, double> cnt;
        for (double a : v) cnt[a] += 1;
        double v5 = 0, v1 = 0, v2 = 0;
        for (auto [k, t] : cnt) {
            v5 += t * (t - 1) * (2 * t + 5);
            v1 += t * (t - 1);
            v2 += t * (t - 1) * (t - 2);
        }
        return std::array<double, 3>{v5, v1, v2};
    };
    const auto tx = ties(x), ty = ties(y);
    const double var = (nd * (nd - 1) * (2 * nd + 5) - tx[0] - ty[0]) / 18 + tx[1] * ty[1] / (2 * nd * (nd - 1)) +
                       tx[2] * ty[2] / (9 * nd * (nd - 1) * (nd - 2));
    return {s / std::sqrt((n0 - n1) * (n0 - n2)), std::erfc(std::abs(s / std::sqrt(var)) / std::sqrt(2.0))};
}

}  // namespace

TEST(Kendall, MatchesBruteForceWithTies) {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<int> small(0, 6);
    std::normal_distribution<double> nrm;
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> x(28), y(28);
        for (int i = 0; i < 28; ++i) {
            x[i] = trial % 2 ? small(gen) : nrm(gen);
            y[i] = small(gen) + (trial % 3 == 0 ? 0.5 * x[i] : 0.0);
        }
        const auto got = kendall_tau(x, y);
        const auto want = brute_kendall(x, y);
        EXPECT_NEAR(got.tau, want.tau, 1e-12);
        EXPECT_NEAR(got.p_value, want.p, 1e-9);
        EXPECT_EQ(got.n, 28u);
    }
}

TEST(Kendall, PerfectAndReversedOrder) {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{10, 20, 30, 40, 50}, r{5, 4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(kendall_tau(x, y).tau, 1.0);
    EXPECT_DOUBLE_EQ(kendall_tau(x, r).tau, -1.0);
    // n = 5, no ties: z = 10 / sqrt(5*4*15/18).
    EXPECT_NEAR(kendall_tau(x, y).p_value, std::erfc(10.0 / std::sqrt(50.0 / 3.0) / std::sqrt(2.0)), 1e-15);
}

TEST(Kendall, UndefinedCases) {
    EXPECT_THROW(kendall_tau(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), CorrelationUndefinedError);
    EXPECT_THROW(kendall_tau(std::vector<double>{1}, std::vector<double>{2}), CorrelationUndefinedError);
    EXPECT_THROW(kendall_tau(std::vector<double>{1, 2}, std::vector<double>{2}), Error);
}
