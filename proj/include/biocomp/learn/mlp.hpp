#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/error.hpp"
#include "biocomp/learn/model.hpp"
#include "biocomp/random.hpp"

namespace biocomp::learn {

struct MlpOptions {
    int epochs = 120;
    double l2 = 1e-4;
    double initial_step = 1.0;
};

/// One hidden layer of logistic units and a logistic output, trained on mean
/// binary cross-entropy plus an L2 penalty on the weights by full-batch
/// gradient descent with backtracking.
///
/// Parameter vector layout: W1 (h x d, row-major), b1 (h), w2 (h), b2.
class Mlp final : public Model {
public:
    Mlp(Eigen::Index inputs, Eigen::Index hidden) : d_(inputs), h_(hidden), theta_(Eigen::VectorXd::Zero(size(inputs, hidden))) {}

    static Eigen::Index size(Eigen::Index d, Eigen::Index h) { return h * d + h + h + 1; }

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed) {
        Rng rng(seed);
        const double r1 = std::sqrt(6.0 / static_cast<double>(d_ + h_));
        const double r2 = std::sqrt(6.0 / static_cast<double>(h_ + 1));
        theta_.setZero();
        for (Eigen::Index i = 0; i < h_ * d_; ++i) theta_[i] = rng.uniform(-r1, r1);
        for (Eigen::Index i = 0; i < h_; ++i) theta_[h_ * d_ + h_ + i] = rng.uniform(-r2, r2);
    }

    static double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
    static double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

    /// Loss at theta; fills grad when non-null. X must already be standardized.
    double loss(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, const Eigen::VectorXd& t,
                Eigen::VectorXd* grad, double l2) const {
        const Eigen::Index n = X.rows();
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W1(theta.data(), h_, d_);
        const auto b1 = theta.segment(h_ * d_, h_);
        const auto w2 = theta.segment(h_ * d_ + h_, h_);
        const double b2 = theta[size(d_, h_) - 1];

        Eigen::MatrixXd A = (X * W1.transpose()).rowwise() + b1.transpose();
        A = A.unaryExpr([](double z) { return sigmoid(z); });
        const Eigen::VectorXd o = (A * w2).array() + b2;
        double L = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) L += softplus(o[i]) - t[i] * o[i];
        L /= static_cast<double>(n);
        L += 0.5 * l2 * (W1.squaredNorm() + w2.squaredNorm());
        if (!grad) return L;

        Eigen::VectorXd d_o(n);
        for (Eigen::Index i = 0; i < n; ++i) d_o[i] = (sigmoid(o[i]) - t[i]) / static_cast<double>(n);
        grad->resize(theta.size());
        const Eigen::MatrixXd dZ = ((d_o * w2.transpose()).array() * A.array() * (1.0 - A.array())).matrix();
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gW1(grad->data(), h_, d_);
        gW1 = dZ.transpose() * X + l2 * W1;
        grad->segment(h_ * d_, h_) = dZ.colwise().sum().transpose();
        grad->segment(h_ * d_ + h_, h_) = A.transpose() * d_o + l2 * w2;
        (*grad)[size(d_, h_) - 1] = d_o.sum();
        return L;
    }

    static Mlp fit(const Eigen::MatrixXd& Xraw, const std::vector<int>& y, int hidden, std::uint64_t seed,
                   const MlpOptions& opt = {}) {
        require_two_classes(y);
        if (hidden < 1) throw TrainError("mlp: hidden size must be positive");
        Mlp m(Xraw.cols(), hidden);
        m.scaler_ = Standardizer::fit(Xraw);
        const Eigen::MatrixXd X = m.scaler_.apply(Xraw);
        Eigen::VectorXd t(static_cast<Eigen::Index>(y.size()));
        for (std::size_t i = 0; i < y.size(); ++i) t[static_cast<Eigen::Index>(i)] = y[i] == kPositive ? 1.0 : 0.0;
        m.initialize(seed);

        Eigen::VectorXd g, trial;
        double step = opt.initial_step;
        double L = m.loss(m.theta_, X, t, &g, opt.l2);
        m.history_.push_back(L);
        for (int epoch = 0; epoch < opt.epochs; ++epoch) {
            const double g2 = g.squaredNorm();
            if (g2 < 1e-20) break;
            bool accepted = false;
            for (int k = 0; k < 40; ++k) {
                trial = m.theta_ - step * g;
                const double Lt = m.loss(trial, X, t, nullptr, opt.l2);
                if (Lt <= L - 1e-4 * step * g2) {
                    m.theta_ = trial;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            L = m.loss(m.theta_, X, t, &g, opt.l2);
            m.history_.push_back(L);
            step *= 1.5;
        }
        return m;
    }

    Eigen::VectorXd probability(const Eigen::MatrixXd& Xraw) const {
        const Eigen::MatrixXd X = scaler_.apply(Xraw);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W1(theta_.data(), h_, d_);
        Eigen::MatrixXd A = (X * W1.transpose()).rowwise() + theta_.segment(h_ * d_, h_).transpose();
        A = A.unaryExpr([](double z) { return sigmoid(z); });
        const Eigen::VectorXd o = (A * theta_.segment(h_ * d_ + h_, h_)).array() + theta_[size(d_, h_) - 1];
        return o.unaryExpr([](double z) { return sigmoid(z); });
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        const Eigen::VectorXd p = probability(X);
        std::vector<int> out(static_cast<std::size_t>(p.size()));
        for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p[i] > 0.5 ? kPositive : kNegative;
        return out;
    }

    const Standardizer* standardizer() const override { return &scaler_; }
    const Eigen::VectorXd& parameters() const noexcept { return theta_; }
    /// Training loss after initialization and after every accepted epoch.
    const std::vector<double>& loss_history() const noexcept { return history_; }

private:
    Eigen::Index d_, h_;
    Eigen::VectorXd theta_;
    Standardizer scaler_;
    std::vector<double> history_;
};

}  // namespace biocomp::learn
