#include <gtest/gtest.h>

#include "biocomp/learn/classifier.hpp"
#include "biocomp/random.hpp"

using namespace biocomp;
using namespace biocomp::learn;

namespace {

struct Blobs {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

// Two Gaussian classes whose means differ by `shift` along every feature.
Blobs blobs(int n, int d, double shift, std::uint64_t seed) {
    Rng rng(seed);
    Blobs b{Eigen::MatrixXd(n, d), {}};
    for (int i = 0; i < n; ++i) {
        const int c = i % 3 == 0 ? kPositive : kNegative;
        b.y.push_back(c);
        for (int j = 0; j < d; ++j) b.X(i, j) = rng.normal() + (c == kPositive ? shift : 0.0) + 10.0 * j;
    }
    return b;
}

double accuracy(const Model& m, const Blobs& b) {
    const auto p = m.predict(b.X);
    int ok = 0;
    for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == b.y[i];
    return static_cast<double>(ok) / static_cast<double>(p.size());
}

}  // namespace

TEST(Standardizer, PopulationScaleAndConstantColumns) {
    Eigen::MatrixXd X(4, 2);
    X << 1, 5, 2, 5, 3, 5, 4, 5;
    const auto s = Standardizer::fit(X);
    EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
    EXPECT_DOUBLE_EQ(s.scale[0], 1.0 / std::sqrt(1.25));
    EXPECT_DOUBLE_EQ(s.scale[1], 1.0);
    const auto Z = s.apply(X);
    EXPECT_NEAR(Z.col(0).squaredNorm() / 4.0, 1.0, 1e-12);
    EXPECT_EQ(Z.col(1).norm(), 0.0);
}

TEST(Classifiers, EveryFamilyLearnsSeparableBlobs) {
    const auto train = blobs(150, 6, 3.0, 1), test = blobs(90, 6, 3.0, 2);
    for (auto f : kAllFamilies) {
        const auto grid = default_grid(f, 6);
        const auto m = learn::train(f, grid[grid.size() / 2], train.X, train.y, 7);
        EXPECT_GT(accuracy(*m, test), 0.93) << family_name(f);
    }
}

TEST(Classifiers, SameSeedSamePredictions) {
    const auto train = blobs(90, 4, 0.8, 3), test = blobs(60, 4, 0.8, 4);
    for (auto f : kAllFamilies) {
        const double p = default_grid(f, 4).front();
        EXPECT_EQ(learn::train(f, p, train.X, train.y, 11)->predict(test.X),
                  learn::train(f, p, train.X, train.y, 11)->predict(test.X))
            << family_name(f);
    }
}

TEST(Classifiers, SingleClassTrainingRaises) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 2);
    for (auto f : kAllFamilies) EXPECT_THROW(learn::train(f, default_grid(f, 2).front(), X, std::vector<int>(5, 1), 0), TrainError);
}

TEST(Grids, FiveValuesAndRfDedup) {
    for (auto f : kAllFamilies) {
        if (f != Family::RF) {
            EXPECT_EQ(default_grid(f, 46).size(), 5u);
        }
    }
    EXPECT_EQ(default_grid(Family::RF, 46), (std::vector<double>{1, 4, 7, 27, 46}));
    EXPECT_EQ(default_grid(Family::RF, 9), (std::vector<double>{1, 2, 3, 6, 9}));
    EXPECT_EQ(default_grid(Family::RF, 1), (std::vector<double>{1}));
    for (auto f : kAllFamilies) EXPECT_EQ(parse_family(family_name(f)), f);
}

TEST(NaiveBayes, OneDimensionalThreshold) {
    Eigen::MatrixXd X(6, 1);
    X << 0, 1, 2, 10, 11, 12;
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    const auto m = GaussianNB::fit(X, y, 1e-9);
    Eigen::MatrixXd q(3, 1);
    q << 5.9, 6.1, -100;
    EXPECT_EQ(m.predict(q), (std::vector<int>{0, 1, 0}));
}

TEST(Knn, NearestNeighbourVote) {
    Eigen::MatrixXd X(5, 1);
    X << 0, 1, 2, 10, 11;
    const std::vector<int> y{0, 0, 1, 1, 1};
    Eigen::MatrixXd q(2, 1);
    q << 0.2, 9.0;
    EXPECT_EQ(Knn::fit(X, y, 1).predict(q), (std::vector<int>{0, 1}));
    EXPECT_EQ(Knn::fit(X, y, 3).predict(q), (std::vector<int>{0, 1}));
}

TEST(Tree, LearnsXorAndPrunesToRoot) {
    Eigen::MatrixXd X(40, 2);
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        const int a = i % 2, b = (i / 2) % 2;
        X(i, 0) = a + 0.01 * i;
        X(i, 1) = b - 0.01 * i;
        y.push_back(a ^ b);
    }
    const auto full = DecisionTree::fit(X, y, TreeParams{});
    EXPECT_EQ(full.predict(X), y);
    EXPECT_GE(full.leaf_count(), 4u);
    TreeParams strong;
    strong.ccp_alpha = 1.0;
    EXPECT_EQ(DecisionTree::fit(X, y, strong).leaf_count(), 1u);
}

TEST(Tree, PruningIsMonotone) {
    const auto b = blobs(120, 3, 0.7, 9);
    std::size_t prev = SIZE_MAX;
    for (double a : default_grid(Family::TREE, 3)) {
        TreeParams p;
        p.ccp_alpha = a;
        const auto leaves = DecisionTree::fit(b.X, b.y, p).leaf_count();
        EXPECT_LE(leaves, prev);
        prev = leaves;
    }
}

TEST(Svm, MarginSeparatesClasses) {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 0, 1, 3, 0, 3, 1;
    const std::vector<int> y{0, 0, 1, 1};
    const auto m = LinearSvm::fit(X, y, 10.0, 1);
    EXPECT_EQ(m.predict(X), y);
    const auto d = m.decision(X);
    EXPECT_LT(d[0], 0.0);
    EXPECT_GT(d[2], 0.0);
}

TEST(Mlp, GradientMatchesCentralDifferences) {
    const auto b = blobs(32, 46, 0.5, 21);
    Mlp m(46, 7);
    m.initialize(5);
    const Eigen::MatrixXd X = Standardizer::fit(b.X).apply(b.X);
    Eigen::VectorXd t(32);
    for (int i = 0; i < 32; ++i) t[i] = b.y[static_cast<std::size_t>(i)];
    Eigen::VectorXd g;
    const Eigen::VectorXd theta = m.parameters();
    m.loss(theta, X, t, &g, 1e-4);
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < theta.size(); k += 17) {
        Eigen::VectorXd a = theta, c = theta;
        a[k] += h;
        c[k] -= h;
        const double fd = (m.loss(a, X, t, nullptr, 1e-4) - m.loss(c, X, t, nullptr, 1e-4)) / (2 * h);
        EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << k;
    }
}

TEST(Mlp, LossDecreasesMonotonically) {
    const auto b = blobs(90, 5, 1.0, 13);
    const auto m = Mlp::fit(b.X, b.y, 3, 2);
    const auto& h = m.loss_history();
    ASSERT_GT(h.size(), 2u);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
    EXPECT_LT(h.back(), 0.5 * h.front());
}

TEST(Boost, StumpEnsembleBeatsSingleShallowTree) {
    // Positive inside a band: needs more than one depth-2 tree to carve out.
    Rng rng(3);
    Eigen::MatrixXd X(200, 2);
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        X(i, 0) = rng.uniform(-3, 3);
        X(i, 1) = rng.uniform(-3, 3);
        y.push_back(std::abs(X(i, 0)) + std::abs(X(i, 1)) < 2.5 ? 1 : 0);
    }
    TreeParams shallow;
    shallow.max_depth = 2;
    const auto tree = DecisionTree::fit(X, y, shallow);
    const auto boost = AdaBoost::fit(X, y, 50);
    auto acc = [&](const Model& m) {
        const auto p = m.predict(X);
        int ok = 0;
        for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == y[i];
        return ok / 200.0;
    };
    EXPECT_GT(acc(boost), acc(tree));
    EXPECT_GT(acc(boost), 0.9);
}
