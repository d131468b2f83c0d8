#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/error.hpp"
#include "biocomp/learn/model.hpp"

namespace biocomp::learn {

/// k nearest neighbours by Euclidean distance on standardized features.
/// Equal distances go to the earlier training row; a tied vote goes to the nearest neighbour.
class Knn final : public Model {
public:
    static Knn fit(const Eigen::MatrixXd& X, const std::vector<int>& y, int k) {
        require_two_classes(y);
        if (k < 1) throw TrainError("knn: k must be positive");
        Knn m;
        m.k_ = std::min<std::size_t>(static_cast<std::size_t>(k), y.size());
        m.scaler_ = Standardizer::fit(X);
        m.X_ = m.scaler_.apply(X);
        m.y_ = y;
        return m;
    }

    std::vector<int> predict(const Eigen::MatrixXd& Xraw) const override {
        const Eigen::MatrixXd X = scaler_.apply(Xraw);
        const auto n = static_cast<std::size_t>(X_.rows());
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        std::vector<std::size_t> idx(n);
        Eigen::VectorXd dist(X_.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            dist = (X_.rowwise() - X.row(i)).rowwise().squaredNorm();
            std::iota(idx.begin(), idx.end(), 0);
            auto closer = [&](std::size_t a, std::size_t b) {
                const double da = dist[static_cast<Eigen::Index>(a)], db = dist[static_cast<Eigen::Index>(b)];
                return da < db || (da == db && a < b);
            };
            std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_), idx.end(), closer);
            std::size_t pos = 0;
            for (std::size_t j = 0; j < k_; ++j) pos += y_[idx[j]] == kPositive;
            int label;
            if (2 * pos > k_)
                label = kPositive;
            else if (2 * pos < k_)
                label = kNegative;
            else
                label = y_[idx[0]];
            out[static_cast<std::size_t>(i)] = label;
        }
        return out;
    }

    const Standardizer* standardizer() const override { return &scaler_; }

private:
    std::size_t k_ = 1;
    Standardizer scaler_;
    Eigen::MatrixXd X_;
    std::vector<int> y_;
};

}  // namespace biocomp::learn
