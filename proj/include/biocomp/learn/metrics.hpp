#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "biocomp/error.hpp"

namespace biocomp::learn {

/// Class encoding used throughout the learners: CODE is the positive class.
inline constexpr int kPositive = 1;
inline constexpr int kNegative = 0;

struct Confusion {
    long tp = 0, fn = 0, fp = 0, tn = 0;

    long total() const noexcept { return tp + fn + fp + tn; }
    Confusion& operator+=(const Confusion& o) noexcept {
        tp += o.tp, fn += o.fn, fp += o.fp, tn += o.tn;
        return *this;
    }
    /// The same predictions scored with the other class as positive.
    Confusion swapped() const noexcept { return {tn, fp, fn, tp}; }

    friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion(std::span<const int> truth, std::span<const int> pred) {
    if (truth.size() != pred.size()) throw Error("confusion: length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == kPositive)
            (pred[i] == kPositive ? c.tp : c.fn)++;
        else
            (pred[i] == kPositive ? c.fp : c.tn)++;
    }
    return c;
}

/// Mean of sensitivity and specificity; undefined when a class is absent.
inline std::optional<double> balanced_accuracy(const Confusion& c) {
    if (c.tp + c.fn == 0 || c.fp + c.tn == 0) return std::nullopt;
    const double sens = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    const double spec = static_cast<double>(c.tn) / static_cast<double>(c.fp + c.tn);
    return (sens + spec) / 2.0;
}

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-class precision, recall and F1 averaged with equal class weight.
/// Precision of a class never predicted is 0, and so is its F1.
inline std::optional<MacroMetrics> macro_metrics(const Confusion& c) {
    if (c.tp + c.fn == 0 || c.fp + c.tn == 0) return std::nullopt;
    auto per_class = [](long tp, long fn, long fp) {
        const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
        const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        return MacroMetrics{p, r, f};
    };
    const auto pos = per_class(c.tp, c.fn, c.fp);
    const auto neg = per_class(c.tn, c.fp, c.fn);
    return MacroMetrics{(pos.precision + neg.precision) / 2.0, (pos.recall + neg.recall) / 2.0, (pos.f1 + neg.f1) / 2.0};
}

}  // namespace biocomp::learn
