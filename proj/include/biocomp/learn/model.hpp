#pragma once

#include <vector>

#include <Eigen/Dense>

#include "biocomp/learn/dataset.hpp"

namespace biocomp::learn {

/// A fitted binary classifier. Immutable after training.
class Model {
public:
    virtual ~Model() = default;
    virtual std::vector<int> predict(const Eigen::MatrixXd& X) const = 0;
    /// Internal feature scaling, for families that standardize their inputs.
    virtual const Standardizer* standardizer() const { return nullptr; }
};

}  // namespace biocomp::learn
