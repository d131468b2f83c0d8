#include <set>

#include <gtest/gtest.h>

#include "biocomp/learn/evaluate.hpp"
#include "biocomp/learn/report.hpp"
#include "biocomp/random.hpp"

using namespace biocomp;
using namespace biocomp::learn;

namespace {

// `people` participants, 9 rows each (3 positive), label signal of strength `shift`.
Dataset grouped(int people, double shift, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.X.resize(people * 9, 3);
    for (int p = 0; p < people; ++p)
        for (int k = 0; k < 9; ++k) {
            const int r = p * 9 + k, c = k < 3 ? kPositive : kNegative;
            for (int j = 0; j < 3; ++j) d.X(r, j) = rng.normal() + (c == kPositive ? shift : 0.0);
            d.y.push_back(c);
            char id[8];
            std::snprintf(id, sizeof id, "P%02d", p + 1);
            d.group.emplace_back(id);
        }
    return d;
}

ClassifierSpec spec(Family f, std::uint64_t seed = 3) { return {f, default_grid(f, 3), seed}; }

}  // namespace

TEST(StratifiedFolds, BalancedAndDeterministic) {
    std::vector<int> y(50, 0);
    for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = 1;
    const auto f = stratified_folds(y, 5, 9);
    EXPECT_EQ(f, stratified_folds(y, 5, 9));
    for (int k = 0; k < 5; ++k) {
        int pos = 0, all = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (f[i] == k) ++all, pos += y[i];
        EXPECT_EQ(all, 10);
        EXPECT_EQ(pos, 4);
    }
}

TEST(GridSearch, ScoresEveryPointAndPicksBest) {
    const auto d = grouped(10, 2.0, 1);
    const auto g = grid_search(Family::KNN, {5, 7, 9}, d, 4);
    ASSERT_EQ(g.scores.size(), 3u);
    EXPECT_EQ(g.scores[g.index], *std::max_element(g.scores.begin(), g.scores.end()));
    EXPECT_EQ(g.param, std::vector<double>({5, 7, 9})[g.index]);
    for (std::size_t i = 0; i < g.index; ++i) EXPECT_LT(g.scores[i], g.scores[g.index]);
}

TEST(Loro, OneParticipantDisjointFoldPerParticipant) {
    const auto d = grouped(28, 1.0, 2);
    std::vector<std::set<std::string>> train_groups;
    EvalOptions opt;
    opt.hook = [&](const FoldTrace& t) {
        std::set<std::string> tr, te;
        for (auto i : t.train_rows) tr.insert(t.data.group[static_cast<std::size_t>(i)]);
        for (auto i : t.test_rows) te.insert(t.data.group[static_cast<std::size_t>(i)]);
        EXPECT_EQ(te.size(), 1u);
        for (const auto& p : te) EXPECT_FALSE(tr.contains(p));
        EXPECT_EQ(tr.size() + te.size(), 28u);
        EXPECT_EQ(t.train_rows.size() + t.test_rows.size(), 28u * 9u);
        train_groups.push_back(tr);
    };
    const auto r = loro_cv(d, spec(Family::NB), opt);
    EXPECT_EQ(r.folds.size(), 28u);
    EXPECT_EQ(train_groups.size(), 28u);
    std::set<std::string> tested;
    for (const auto& f : r.folds) tested.insert(f.test_participants.at(0));
    EXPECT_EQ(tested.size(), 28u);
    ASSERT_TRUE(r.median_bac.has_value());
    EXPECT_GT(*r.median_bac, 0.6);
}

TEST(Loro, ExpectedParticipantWithoutRowsIsReported) {
    const auto d = grouped(4, 1.0, 2);
    const auto r = loro_cv(d, spec(Family::NB), {}, {"P01", "P02", "P03", "P04", "P05"});
    EXPECT_EQ(r.folds.size(), 4u);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings[0].find("P05"), std::string::npos);
}

TEST(Loro, ParallelMatchesSerial) {
    const auto d = grouped(8, 0.8, 5);
    EvalOptions one, many;
    many.jobs = 4;
    const auto a = loro_cv(d, spec(Family::RF), one), b = loro_cv(d, spec(Family::RF), many);
    ASSERT_EQ(a.folds.size(), b.folds.size());
    for (std::size_t i = 0; i < a.folds.size(); ++i) {
        EXPECT_EQ(a.folds[i].bac, b.folds[i].bac);
        EXPECT_EQ(a.folds[i].param, b.folds[i].param);
    }
}

TEST(Holdout, TenRepeatsOfTwentyEight) {
    const auto d = grouped(28, 1.0, 6);
    std::vector<std::pair<std::size_t, std::size_t>> sizes;
    EvalOptions opt;
    opt.hook = [&](const FoldTrace& t) {
        std::set<std::string> tr, te;
        for (auto i : t.train_rows) tr.insert(t.data.group[static_cast<std::size_t>(i)]);
        for (auto i : t.test_rows) te.insert(t.data.group[static_cast<std::size_t>(i)]);
        for (const auto& p : te) EXPECT_FALSE(tr.contains(p));
        sizes.emplace_back(tr.size(), te.size());
    };
    const auto r = holdout_eval(d, spec(Family::NB), opt);
    EXPECT_EQ(r.folds.size(), 10u);
    for (auto [a, b] : sizes) {
        EXPECT_EQ(a, 20u);
        EXPECT_EQ(b, 8u);
    }
    const auto splits = holdout_splits(participants_of(d), 10, 3);
    EXPECT_EQ(std::set(splits.begin(), splits.end()).size(), 10u);
}

TEST(Holdout, TrainCountRoundsUp) {
    EXPECT_EQ(holdout_train_count(28), 20u);
    EXPECT_EQ(holdout_train_count(14), 10u);
    EXPECT_EQ(holdout_train_count(10), 8u);
    EXPECT_THROW(holdout_eval(grouped(5, 1.0, 1), spec(Family::NB)), TrainError);
}

TEST(Summary, MedianAndMeanMacroOverDefinedFolds) {
    ComboResult c;
    c.folds = {{0, {"A"}, {1, 1, 0, 2}, 0.75, 0, 0}, {1, {"B"}, {2, 0, 0, 2}, 1.0, 0, 0},
               {2, {"C"}, {0, 0, 1, 3}, std::nullopt, 0, 0}};
    summarize(c);
    EXPECT_DOUBLE_EQ(*c.median_bac, 0.875);
    const auto m0 = *macro_metrics({1, 1, 0, 2});
    EXPECT_DOUBLE_EQ(c.macro->f1, (m0.f1 + 1.0) / 2.0);
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_FALSE(median({}).has_value());
}

TEST(Report, JsonRoundTripAndTables) {
    const auto d = grouped(6, 2.0, 8);
    EvalReport rep;
    rep.seed = 3;
    rep.participants = participants_of(d);
    for (auto f : {Family::NB, Family::KNN}) {
        auto r = loro_cv(d, spec(f));
        r.config = "HEART";
        rep.results.push_back(r);
    }
    const auto back = report_from_json(to_json(rep));
    EXPECT_EQ(to_json(back).dump(), to_json(rep).dump());

    const auto table = best_table_csv(rep, Protocol::LORO);
    EXPECT_EQ(table.substr(0, table.find('\n')), "Signal,Best Classifier,Precision,Recall,F1,BAC");
    EXPECT_EQ(table.substr(table.find('\n') + 1, 6), "HEART,");
    const auto grid = medians_csv(rep);
    EXPECT_EQ(grid.substr(0, grid.find('\n')), "Protocol,Signal,nb,knn,tree,svmLinear,mlp,rf,boost");
    EXPECT_NE(grid.find("LORO,HEART,"), std::string::npos);
    EXPECT_NE(grid.find(",NA"), std::string::npos);
}

TEST(Report, BestPerParticipantUsesLoroOnly) {
    EvalReport rep;
    ComboResult a, b, h;
    a.folds = {{0, {"P1"}, {}, 0.6, 0, 0}, {1, {"P2"}, {}, 0.9, 0, 0}};
    b.folds = {{0, {"P1"}, {}, 0.8, 0, 0}, {1, {"P2"}, {}, std::nullopt, 0, 0}};
    h.protocol = Protocol::HOLDOUT;
    h.folds = {{0, {"P1"}, {}, 1.0, 0, 0}};
    rep.results = {a, b, h};
    const auto best = best_bac_per_participant(rep);
    EXPECT_DOUBLE_EQ(best.at("P1"), 0.8);
    EXPECT_DOUBLE_EQ(best.at("P2"), 0.9);
}

TEST(Report, MalformedJsonRaisesConfigError) {
    EXPECT_THROW(report_from_json(nlohmann::json{{"seed", 1}}), ConfigError);
}
