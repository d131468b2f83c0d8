#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/error.hpp"
#include "biocomp/learn/model.hpp"
#include "biocomp/random.hpp"

namespace biocomp::learn {

/// Per-feature split candidates. Features with few distinct values keep every
/// midpoint; others use midpoints at equally spaced quantiles.
struct Bins {
    static constexpr std::size_t kMaxBins = 64;

    std::vector<std::vector<double>> edges;  // ascending, per feature
    std::vector<std::uint8_t> code;          // column-major n x d, code = #edges below x
    std::size_t n = 0;

    static Bins build(const Eigen::MatrixXd& X) {
        Bins b;
        b.n = static_cast<std::size_t>(X.rows());
        const auto d = static_cast<std::size_t>(X.cols());
        b.edges.resize(d);
        b.code.resize(b.n * d);
        std::vector<double> v(b.n);
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < b.n; ++i) v[i] = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            std::vector<double> sorted = v;
            std::sort(sorted.begin(), sorted.end());
            std::vector<double> uniq;
            for (double x : sorted)
                if (uniq.empty() || x != uniq.back()) uniq.push_back(x);
            auto& e = b.edges[j];
            if (uniq.size() <= kMaxBins) {
                for (std::size_t k = 1; k < uniq.size(); ++k) e.push_back(0.5 * (uniq[k - 1] + uniq[k]));
            } else {
                for (std::size_t q = 1; q < kMaxBins; ++q) {
                    const double x = sorted[q * b.n / kMaxBins];
                    auto next = std::upper_bound(uniq.begin(), uniq.end(), x);
                    if (next == uniq.end()) break;
                    const double cut = 0.5 * (x + *next);
                    if (e.empty() || cut > e.back()) e.push_back(cut);
                }
            }
            for (std::size_t i = 0; i < b.n; ++i)
                b.code[j * b.n + i] =
                    static_cast<std::uint8_t>(std::lower_bound(e.begin(), e.end(), v[i]) - e.begin());
        }
        return b;
    }

    std::uint8_t at(std::size_t i, std::size_t j) const { return code[j * n + i]; }
};

struct TreeParams {
    int max_depth = -1;         // negative = unlimited
    std::size_t mtry = 0;       // features tried per split; 0 = all
    double ccp_alpha = 0.0;     // cost-complexity pruning strength
};

/// Weighted Gini CART for binary labels.
class DecisionTree final : public Model {
public:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1, right = -1;
        double p_positive = 0.0;
        double weight = 0.0;  // fraction of the total training weight
        double impurity = 0.0;
    };

    static DecisionTree fit(const Bins& bins, const std::vector<int>& y, std::span<const double> w,
                            std::span<const std::size_t> rows, const TreeParams& params, Rng* rng) {
        DecisionTree t;
        Builder b{bins, y, w, params, rng, t.nodes_, {}, 0.0, {}, {}};
        b.features.resize(bins.edges.size());
        std::iota(b.features.begin(), b.features.end(), 0);
        for (auto r : rows) b.total += w[r];
        std::vector<std::size_t> idx(rows.begin(), rows.end());
        b.grow(idx, 0, idx.size(), 0);
        if (params.ccp_alpha > 0.0) {
            t.prune(0, params.ccp_alpha);
            t.compact();
        }
        return t;
    }

    static DecisionTree fit(const Eigen::MatrixXd& X, const std::vector<int>& y, const TreeParams& params) {
        require_two_classes(y);
        const Bins bins = Bins::build(X);
        std::vector<double> w(y.size(), 1.0);
        std::vector<std::size_t> rows(y.size());
        std::iota(rows.begin(), rows.end(), 0);
        return fit(bins, y, w, rows, params, nullptr);
    }

    double p_positive(const Eigen::RowVectorXd& x) const {
        int k = 0;
        while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
            const auto& nd = nodes_[static_cast<std::size_t>(k)];
            k = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(k)].p_positive;
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out[static_cast<std::size_t>(i)] = p_positive(X.row(i)) > 0.5 ? kPositive : kNegative;
        return out;
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    std::size_t leaf_count() const {
        std::size_t c = 0;
        for (const auto& nd : nodes_) c += nd.feature < 0;
        return c;
    }

private:
    std::vector<Node> nodes_;

    struct Builder {
        const Bins& bins;
        const std::vector<int>& y;
        std::span<const double> w;
        const TreeParams& params;
        Rng* rng;
        std::vector<Node>& nodes;
        std::vector<std::size_t> features;
        double total;
        std::vector<double> h0, h1;

        int grow(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
            double w0 = 0.0, w1 = 0.0;
            for (std::size_t k = lo; k < hi; ++k) (y[idx[k]] == kPositive ? w1 : w0) += w[idx[k]];
            const double wt = w0 + w1;
            const int id = static_cast<int>(nodes.size());
            Node nd;
            nd.p_positive = wt > 0.0 ? w1 / wt : 0.0;
            nd.weight = total > 0.0 ? wt / total : 0.0;
            nd.impurity = wt > 0.0 ? 1.0 - (w0 * w0 + w1 * w1) / (wt * wt) : 0.0;
            nodes.push_back(nd);
            if (hi - lo < 2 || w0 <= 0.0 || w1 <= 0.0 || (params.max_depth >= 0 && depth >= params.max_depth))
                return id;

            const std::size_t d = features.size();
            const std::size_t tries = params.mtry == 0 || params.mtry >= d ? d : params.mtry;
            if (tries < d) {
                for (std::size_t k = 0; k < tries; ++k) {
                    const auto j = k + static_cast<std::size_t>(rng->index(d - k));
                    std::swap(features[k], features[j]);
                }
            }
            const double parent = wt - (w0 * w0 + w1 * w1) / wt;
            double best_gain = 1e-12 * wt;
            std::size_t best_f = 0, best_bin = 0;
            bool found = false;
            std::vector<std::size_t> order(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(tries));
            if (tries < d) std::sort(order.begin(), order.end());
            for (auto f : order) {
                const std::size_t nb = bins.edges[f].size() + 1;
                if (nb < 2) continue;
                h0.assign(nb, 0.0);
                h1.assign(nb, 0.0);
                for (std::size_t k = lo; k < hi; ++k) {
                    const auto r = idx[k];
                    (y[r] == kPositive ? h1 : h0)[bins.at(r, f)] += w[r];
                }
                double l0 = 0.0, l1 = 0.0;
                for (std::size_t b = 0; b + 1 < nb; ++b) {
                    l0 += h0[b];
                    l1 += h1[b];
                    const double lw = l0 + l1, r0 = w0 - l0, r1 = w1 - l1, rw = r0 + r1;
                    if (lw <= 0.0 || rw <= 0.0) continue;
                    const double child = lw - (l0 * l0 + l1 * l1) / lw + rw - (r0 * r0 + r1 * r1) / rw;
                    const double gain = parent - child;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_f = f;
                        best_bin = b;
                        found = true;
                    }
                }
            }
            if (!found) return id;

            auto mid_it = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                                idx.begin() + static_cast<std::ptrdiff_t>(hi),
                                                [&](std::size_t r) { return bins.at(r, best_f) <= best_bin; });
            const auto mid = static_cast<std::size_t>(mid_it - idx.begin());
            const int l = grow(idx, lo, mid, depth + 1);
            const int r = grow(idx, mid, hi, depth + 1);
            auto& me = nodes[static_cast<std::size_t>(id)];
            me.feature = static_cast<int>(best_f);
            me.threshold = bins.edges[best_f][best_bin];
            me.left = l;
            me.right = r;
            return id;
        }
    };

    /// Drops nodes no longer reachable from the root, keeping preorder.
    void compact() {
        std::vector<Node> kept;
        auto copy = [&](auto&& self, int k) -> int {
            const int id = static_cast<int>(kept.size());
            kept.push_back(nodes_[static_cast<std::size_t>(k)]);
            if (kept.back().feature >= 0) {
                const int l = self(self, kept.back().left);
                const int r = self(self, kept[static_cast<std::size_t>(id)].right);
                kept[static_cast<std::size_t>(id)].left = l;
                kept[static_cast<std::size_t>(id)].right = r;
            }
            return id;
        };
        copy(copy, 0);
        nodes_ = std::move(kept);
    }

    /// Minimal cost-complexity subtree: returns the pruned subtree's cost
    /// R(T) + alpha |leaves(T)|, with R the weighted Gini impurity.
    double prune(int k, double alpha) {
        auto& nd = nodes_[static_cast<std::size_t>(k)];
        const double as_leaf = nd.weight * nd.impurity + alpha;
        if (nd.feature < 0) return as_leaf;
        const int l = nd.left, r = nd.right;
        const double children = prune(l, alpha) + prune(r, alpha);
        auto& me = nodes_[static_cast<std::size_t>(k)];
        if (as_leaf <= children) {
            me.feature = -1;
            me.left = me.right = -1;
            return as_leaf;
        }
        return children;
    }
};

/// Bagged unpruned trees with a random feature subset tried at every split.
class RandomForest final : public Model {
public:
    static constexpr int kTrees = 50;

    static RandomForest fit(const Eigen::MatrixXd& X, const std::vector<int>& y, std::size_t mtry, std::uint64_t seed,
                            int trees = kTrees) {
        require_two_classes(y);
        RandomForest f;
        const Bins bins = Bins::build(X);
        const std::vector<double> w(y.size(), 1.0);
        TreeParams p;
        p.mtry = mtry;
        Rng rng(seed);
        std::vector<std::size_t> rows(y.size());
        for (int t = 0; t < trees; ++t) {
            for (auto& r : rows) r = static_cast<std::size_t>(rng.index(y.size()));
            std::sort(rows.begin(), rows.end());
            f.trees_.push_back(DecisionTree::fit(bins, y, w, rows, p, &rng));
        }
        return f;
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const Eigen::RowVectorXd x = X.row(i);
            double p = 0.0;
            for (const auto& t : trees_) p += t.p_positive(x);
            out[static_cast<std::size_t>(i)] = p / static_cast<double>(trees_.size()) > 0.5 ? kPositive : kNegative;
        }
        return out;
    }

    std::size_t size() const noexcept { return trees_.size(); }

private:
    std::vector<DecisionTree> trees_;
};

/// Discrete AdaBoost (SAMME, two classes) over depth-2 trees.
class AdaBoost final : public Model {
public:
    static constexpr int kDepth = 2;

    static AdaBoost fit(const Eigen::MatrixXd& X, const std::vector<int>& y, int trials) {
        require_two_classes(y);
        AdaBoost m;
        const Bins bins = Bins::build(X);
        const std::size_t n = y.size();
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        TreeParams p;
        p.max_depth = kDepth;
        std::vector<int> h(n);
        for (int t = 0; t < trials; ++t) {
            auto tree = DecisionTree::fit(bins, y, w, rows, p, nullptr);
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                h[i] = tree.p_positive(X.row(static_cast<Eigen::Index>(i))) > 0.5 ? kPositive : kNegative;
                if (h[i] != y[i]) err += w[i];
            }
            if (err <= 1e-10) {
                m.stages_.push_back({std::move(tree), 10.0});
                break;
            }
            if (err >= 0.5) {
                if (m.stages_.empty()) m.stages_.push_back({std::move(tree), 1.0});
                break;
            }
            const double alpha = std::log((1.0 - err) / err);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (h[i] != y[i]) w[i] *= std::exp(alpha);
                sum += w[i];
            }
            for (auto& v : w) v /= sum;
            m.stages_.push_back({std::move(tree), alpha});
        }
        return m;
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const Eigen::RowVectorXd x = X.row(i);
            double s = 0.0;
            for (const auto& st : stages_) s += st.alpha * (st.tree.p_positive(x) > 0.5 ? 1.0 : -1.0);
            out[static_cast<std::size_t>(i)] = s > 0.0 ? kPositive : kNegative;
        }
        return out;
    }

    std::size_t size() const noexcept { return stages_.size(); }

private:
    struct Stage {
        DecisionTree tree;
        double alpha;
    };
    std::vector<Stage> stages_;
};

}  // namespace biocomp::learn
