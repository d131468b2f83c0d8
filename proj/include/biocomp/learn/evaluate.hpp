#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "biocomp/error.hpp"
#include "biocomp/learn/classifier.hpp"
#include "biocomp/learn/dataset.hpp"
#include "biocomp/learn/metrics.hpp"
#include "biocomp/parallel.hpp"
#include "biocomp/random.hpp"

namespace biocomp::learn {

enum class Protocol { LORO, HOLDOUT };

constexpr const char* protocol_name(Protocol p) noexcept { return p == Protocol::LORO ? "LORO" : "HOLDOUT"; }

inline constexpr int kInnerFolds = 5;
inline constexpr int kHoldoutRepeats = 10;
inline constexpr double kHoldoutTrainShare = 20.0 / 28.0;

inline std::unique_ptr<Model> train_model(Family f, double param, const Dataset& d, std::uint64_t seed) {
    return train(f, param, d.X, d.y, seed);
}

struct GridResult {
    double param = 0.0;
    std::size_t index = 0;
    std::vector<double> scores;  // mean inner BAC per grid point
};

/// Stratified assignment of rows to k folds: each class is shuffled and dealt round-robin.
inline std::vector<int> stratified_folds(const std::vector<int>& y, int k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> fold(y.size(), 0);
    for (int c : {kNegative, kPositive}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == c) idx.push_back(i);
        rng.shuffle(std::span<std::size_t>(idx));
        for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
    }
    return fold;
}

/// Picks the grid point with the highest mean BAC over stratified inner folds;
/// the earliest point wins ties.
inline GridResult grid_search(Family family, const std::vector<double>& grid, const Dataset& train, std::uint64_t seed) {
    if (grid.empty()) throw TrainError("empty parameter grid");
    require_two_classes(train.y);
    GridResult out;
    if (grid.size() == 1) {
        out.param = grid.front();
        out.scores = {std::numeric_limits<double>::quiet_NaN()};
        return out;
    }
    const auto fold = stratified_folds(train.y, kInnerFolds, derive_seed(seed, {0}));
    std::vector<Dataset> fit_parts, eval_parts;
    for (int k = 0; k < kInnerFolds; ++k) {
        std::vector<Eigen::Index> a, b;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == k ? b : a).push_back(static_cast<Eigen::Index>(i));
        fit_parts.push_back(train.subset(a));
        eval_parts.push_back(train.subset(b));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        int count = 0;
        for (int k = 0; k < kInnerFolds; ++k) {
            if (eval_parts[static_cast<std::size_t>(k)].y.empty()) continue;
            const auto model = train_model(family, grid[g], fit_parts[static_cast<std::size_t>(k)],
                                           derive_seed(seed, {1, g, static_cast<std::uint64_t>(k)}));
            const auto& ev = eval_parts[static_cast<std::size_t>(k)];
            if (auto bac = balanced_accuracy(confusion(ev.y, model->predict(ev.X)))) sum += *bac, ++count;
        }
        const double score = count > 0 ? sum / count : -std::numeric_limits<double>::infinity();
        out.scores.push_back(score);
        if (score > best) {
            best = score;
            out.param = grid[g];
            out.index = g;
        }
    }
    return out;
}

/// Hook for inspecting each outer fold, e.g. to assert the absence of leakage.
struct FoldTrace {
    Protocol protocol;
    int fold;
    const Dataset& data;
    const std::vector<Eigen::Index>& train_rows;
    const std::vector<Eigen::Index>& test_rows;
    const Model& model;
};
using FoldHook = std::function<void(const FoldTrace&)>;

struct FoldResult {
    int fold = 0;
    std::vector<std::string> test_participants;
    Confusion confusion;
    std::optional<double> bac;
    double param = 0.0;
    std::size_t n_train = 0;
};

struct ComboResult {
    std::string config;
    Family family = Family::NB;
    Protocol protocol = Protocol::LORO;
    std::vector<FoldResult> folds;
    std::optional<double> median_bac;
    std::optional<MacroMetrics> macro;
    std::vector<std::string> warnings;
};

inline std::optional<double> median(std::vector<double> v) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median BAC and mean macro metrics over folds with a defined BAC.
inline void summarize(ComboResult& r) {
    std::vector<double> bacs;
    MacroMetrics sum;
    for (const auto& f : r.folds) {
        if (!f.bac) continue;
        bacs.push_back(*f.bac);
        const auto m = *macro_metrics(f.confusion);
        sum.precision += m.precision, sum.recall += m.recall, sum.f1 += m.f1;
    }
    r.median_bac = median(bacs);
    if (!bacs.empty()) {
        const double n = static_cast<double>(bacs.size());
        r.macro = MacroMetrics{sum.precision / n, sum.recall / n, sum.f1 / n};
    } else {
        r.macro.reset();
    }
}

struct EvalOptions {
    std::uint64_t seed = 0;
    int jobs = 1;
    int repeats = kHoldoutRepeats;
    FoldHook hook;
};

inline std::vector<std::string> participants_of(const Dataset& d) {
    std::set<std::string> s(d.group.begin(), d.group.end());
    return {s.begin(), s.end()};
}

namespace detail {

struct OuterSplit {
    std::vector<Eigen::Index> train, test;
    std::vector<std::string> test_participants;
};

inline void run_folds(ComboResult& out, const Dataset& data, const ClassifierSpec& spec,
                      const std::vector<OuterSplit>& splits, const EvalOptions& opt) {
    std::vector<std::optional<FoldResult>> results(splits.size());
    std::vector<std::string> notes(splits.size());
    std::mutex hook_mu;
    parallel_for(splits.size(), opt.jobs, [&](std::size_t f) {
        const auto& s = splits[f];
        if (s.test.empty()) {
            notes[f] = "fold " + std::to_string(f) + ": no test rows, skipped";
            return;
        }
        const Dataset train = data.subset(s.train);
        const Dataset test = data.subset(s.test);
        bool pos = false, neg = false;
        for (int v : train.y) (v == kPositive ? pos : neg) = true;
        if (!pos || !neg) {
            notes[f] = "fold " + std::to_string(f) + ": single-class training set, skipped";
            return;
        }
        const std::uint64_t fs = derive_seed(spec.seed, {static_cast<std::uint64_t>(f)});
        const auto g = grid_search(spec.family, spec.grid, train, fs);
        const auto model = train_model(spec.family, g.param, train, derive_seed(fs, {2}));
        FoldResult r;
        r.fold = static_cast<int>(f);
        r.test_participants = s.test_participants;
        r.confusion = confusion(test.y, model->predict(test.X));
        r.bac = balanced_accuracy(r.confusion);
        r.param = g.param;
        r.n_train = s.train.size();
        if (!r.bac) notes[f] = "fold " + std::to_string(f) + ": single-class test set, BAC undefined";
        if (opt.hook) {
            std::lock_guard lock(hook_mu);
            opt.hook(FoldTrace{out.protocol, static_cast<int>(f), data, s.train, s.test, *model});
        }
        results[f] = std::move(r);
    });
    for (std::size_t f = 0; f < splits.size(); ++f) {
        if (results[f]) out.folds.push_back(std::move(*results[f]));
        if (!notes[f].empty()) out.warnings.push_back(notes[f]);
    }
    summarize(out);
}

}  // namespace detail

/// One fold per participant: train on everyone else, test on that participant.
/// Participants listed in `expected` but without rows are reported and skipped.
inline ComboResult loro_cv(const Dataset& data, const ClassifierSpec& spec, const EvalOptions& opt = {},
                           const std::vector<std::string>& expected = {}) {
    ComboResult out;
    out.family = spec.family;
    out.protocol = Protocol::LORO;
    const auto people = participants_of(data);
    if (people.size() < 2) throw TrainError("LORO needs at least two participants");
    for (const auto& p : expected)
        if (!std::binary_search(people.begin(), people.end(), p))
            out.warnings.push_back("participant " + p + " has no answered tasks, fold skipped");
    std::vector<detail::OuterSplit> splits(people.size());
    for (std::size_t f = 0; f < people.size(); ++f) {
        splits[f].test_participants = {people[f]};
        for (Eigen::Index i = 0; i < data.rows(); ++i)
            (data.group[static_cast<std::size_t>(i)] == people[f] ? splits[f].test : splits[f].train).push_back(i);
    }
    detail::run_folds(out, data, spec, splits, opt);
    return out;
}

inline std::size_t holdout_train_count(std::size_t participants) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(participants) * kHoldoutTrainShare - 1e-9));
}

/// Repeated participant-level splits in the 20:8 proportion (training side rounded up).
inline std::vector<std::vector<std::string>> holdout_splits(const std::vector<std::string>& people, int repeats,
                                                            std::uint64_t seed) {
    const std::size_t n_train = holdout_train_count(people.size());
    std::vector<std::vector<std::string>> out;
    for (int r = 0; r < repeats; ++r) {
        Rng rng(derive_seed(seed, {0x484F4C44ULL, static_cast<std::uint64_t>(r)}));
        auto order = people;
        rng.shuffle(std::span<std::string>(order));
        order.resize(n_train);
        std::sort(order.begin(), order.end());
        out.push_back(std::move(order));
    }
    return out;
}

inline ComboResult holdout_eval(const Dataset& data, const ClassifierSpec& spec, const EvalOptions& opt = {}) {
    ComboResult out;
    out.family = spec.family;
    out.protocol = Protocol::HOLDOUT;
    const auto people = participants_of(data);
    if (people.size() < 9) throw TrainError("hold-out needs at least 9 participants");
    const auto train_sets = holdout_splits(people, opt.repeats, spec.seed);
    std::vector<detail::OuterSplit> splits(train_sets.size());
    for (std::size_t r = 0; r < train_sets.size(); ++r) {
        const auto& tr = train_sets[r];
        for (const auto& p : people)
            if (!std::binary_search(tr.begin(), tr.end(), p)) splits[r].test_participants.push_back(p);
        for (Eigen::Index i = 0; i < data.rows(); ++i)
            (std::binary_search(tr.begin(), tr.end(), data.group[static_cast<std::size_t>(i)]) ? splits[r].train
                                                                                                : splits[r].test)
                .push_back(i);
    }
    detail::run_folds(out, data, spec, splits, opt);
    return out;
}

}  // namespace biocomp::learn
