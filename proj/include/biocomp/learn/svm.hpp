#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/learn/model.hpp"
#include "biocomp/random.hpp"

namespace biocomp::learn {

/// Linear soft-margin SVM (hinge loss), trained by dual coordinate descent
/// with the bias folded in as a constant feature.
class LinearSvm final : public Model {
public:
    static constexpr int kMaxPasses = 200;
    static constexpr double kTolerance = 1e-3;

    static LinearSvm fit(const Eigen::MatrixXd& Xraw, const std::vector<int>& y, double C, std::uint64_t seed) {
        require_two_classes(y);
        LinearSvm m;
        m.scaler_ = Standardizer::fit(Xraw);
        const Eigen::MatrixXd X = m.scaler_.apply(Xraw);
        const Eigen::Index n = X.rows(), d = X.cols();
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
        double b = 0.0;
        std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
        Eigen::VectorXd qii = X.rowwise().squaredNorm().array() + 1.0;
        std::vector<std::size_t> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(seed);
        for (int pass = 0; pass < kMaxPasses; ++pass) {
            rng.shuffle(std::span<std::size_t>(order));
            double pg_max = -INFINITY, pg_min = INFINITY;
            for (auto i : order) {
                const auto r = static_cast<Eigen::Index>(i);
                const double yi = y[i] == kPositive ? 1.0 : -1.0;
                const double g = yi * (X.row(r).dot(w) + b) - 1.0;
                double pg = g;
                if (alpha[i] == 0.0) pg = std::min(g, 0.0);
                else if (alpha[i] == C) pg = std::max(g, 0.0);
                pg_max = std::max(pg_max, pg);
                pg_min = std::min(pg_min, pg);
                if (std::abs(pg) < 1e-12) continue;
                const double old = alpha[i];
                alpha[i] = std::clamp(old - g / qii[r], 0.0, C);
                const double step = (alpha[i] - old) * yi;
                w += step * X.row(r).transpose();
                b += step;
            }
            if (pg_max - pg_min < kTolerance) break;
        }
        m.w_ = w;
        m.b_ = b;
        return m;
    }

    Eigen::VectorXd decision(const Eigen::MatrixXd& X) const {
        return (scaler_.apply(X) * w_).array() + b_;
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        const Eigen::VectorXd f = decision(X);
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = f[i] > 0.0 ? kPositive : kNegative;
        return out;
    }

    const Standardizer* standardizer() const override { return &scaler_; }

private:
    Standardizer scaler_;
    Eigen::VectorXd w_;
    double b_ = 0.0;
};

}  // namespace biocomp::learn
