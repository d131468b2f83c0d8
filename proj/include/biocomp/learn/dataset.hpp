#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/error.hpp"
#include "biocomp/features.hpp"
#include "biocomp/learn/metrics.hpp"

namespace biocomp::learn {

struct Dataset {
    Eigen::MatrixXd X;  // one row per task
    std::vector<int> y;
    std::vector<std::string> group;  // participant id per row

    Eigen::Index rows() const noexcept { return X.rows(); }
    Eigen::Index cols() const noexcept { return X.cols(); }

    Dataset subset(const std::vector<Eigen::Index>& idx) const {
        Dataset d;
        d.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
        d.y.reserve(idx.size());
        d.group.reserve(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            d.X.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
            d.y.push_back(y[static_cast<std::size_t>(idx[i])]);
            d.group.push_back(group[static_cast<std::size_t>(idx[i])]);
        }
        return d;
    }
};

inline Dataset to_dataset(const FeatureMatrix& m) {
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const auto& row = m.rows[r];
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!row.values[c]) throw TrainError("feature matrix still has missing values");
            d.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *row.values[c];
        }
        d.y.push_back(row.label == TaskKind::CODE ? kPositive : kNegative);
        d.group.push_back(row.participant_id);
    }
    return d;
}

/// Column-wise affine map to zero mean and unit variance, fitted on training rows.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& X) {
        Standardizer s;
        const double n = static_cast<double>(X.rows());
        s.mean = X.colwise().mean();
        s.scale.resize(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double var = (X.col(j).array() - s.mean[j]).square().sum() / n;
            const double sd = std::sqrt(var);
            s.scale[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
        }
        return s;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        return (X.rowwise() - mean).array().rowwise() * scale.array();
    }
};

inline void require_two_classes(const std::vector<int>& y) {
    bool pos = false, neg = false;
    for (int v : y) (v == kPositive ? pos : neg) = true;
    if (!pos || !neg) throw TrainError("training set must contain both classes");
}

}  // namespace biocomp::learn
