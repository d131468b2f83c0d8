#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/learn/model.hpp"

namespace biocomp::learn {

/// Gaussian naive Bayes. Every class variance is inflated by
/// var_smoothing times the largest feature variance.
class GaussianNB final : public Model {
public:
    static GaussianNB fit(const Eigen::MatrixXd& X, const std::vector<int>& y, double var_smoothing) {
        require_two_classes(y);
        GaussianNB m;
        const Eigen::Index d = X.cols();
        const double n = static_cast<double>(X.rows());
        const Eigen::RowVectorXd all_mean = X.colwise().mean();
        const double max_var = ((X.rowwise() - all_mean).array().square().colwise().sum() / n).maxCoeff();
        const double eps = var_smoothing * max_var;
        for (int c = 0; c < 2; ++c) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(d);
            double count = 0.0;
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                if (y[static_cast<std::size_t>(i)] == c) sum += X.row(i), count += 1.0;
            m.mean_[c] = sum / count;
            Eigen::RowVectorXd ss = Eigen::RowVectorXd::Zero(d);
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                if (y[static_cast<std::size_t>(i)] == c) ss += (X.row(i) - m.mean_[c]).array().square().matrix();
            m.var_[c] = (ss / count).array() + eps;
            if (eps == 0.0) m.var_[c] = m.var_[c].array().max(1e-300);
            m.log_prior_[c] = std::log(count / n);
        }
        return m;
    }

    double log_likelihood(const Eigen::RowVectorXd& x, int c) const {
        const auto diff2 = (x - mean_[c]).array().square();
        return log_prior_[c] -
               0.5 * ((2.0 * std::numbers::pi * var_[c].array()).log() + diff2 / var_[c].array()).sum();
    }

    std::vector<int> predict(const Eigen::MatrixXd& X) const override {
        std::vector<int> out(static_cast<std::size_t>(X.rows()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const Eigen::RowVectorXd x = X.row(i);
            out[static_cast<std::size_t>(i)] = log_likelihood(x, kPositive) > log_likelihood(x, kNegative) ? kPositive : kNegative;
        }
        return out;
    }

private:
    Eigen::RowVectorXd mean_[2], var_[2];
    double log_prior_[2] = {0.0, 0.0};
};

}  // namespace biocomp::learn
