#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "biocomp/error.hpp"
#include "biocomp/learn/knn.hpp"
#include "biocomp/learn/mlp.hpp"
#include "biocomp/learn/model.hpp"
#include "biocomp/learn/naive_bayes.hpp"
#include "biocomp/learn/svm.hpp"
#include "biocomp/learn/tree.hpp"

namespace biocomp::learn {

enum class Family { NB, KNN, TREE, SVM_LINEAR, MLP, RF, BOOST };

inline constexpr std::array<Family, 7> kAllFamilies{Family::NB,  Family::KNN, Family::TREE, Family::SVM_LINEAR,
                                                    Family::MLP, Family::RF,  Family::BOOST};

/// Short names as used in the report tables.
constexpr std::string_view family_name(Family f) noexcept {
    switch (f) {
        case Family::NB: return "nb";
        case Family::KNN: return "knn";
        case Family::TREE: return "tree";
        case Family::SVM_LINEAR: return "svmLinear";
        case Family::MLP: return "mlp";
        case Family::RF: return "rf";
        case Family::BOOST: return "boost";
    }
    return "?";
}

/// Name of the tuned parameter of each family.
constexpr std::string_view parameter_name(Family f) noexcept {
    switch (f) {
        case Family::NB: return "var_smoothing";
        case Family::KNN: return "k";
        case Family::TREE: return "ccp_alpha";
        case Family::SVM_LINEAR: return "C";
        case Family::MLP: return "hidden";
        case Family::RF: return "mtry";
        case Family::BOOST: return "trials";
    }
    return "?";
}

inline std::optional<Family> parse_family(std::string_view name) {
    std::string s(name);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto f : kAllFamilies) {
        std::string n(family_name(f));
        for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (n == s) return f;
    }
    if (s == "svm" || s == "svm_linear") return Family::SVM_LINEAR;
    return std::nullopt;
}

/// Five candidate values per family; RF mtry depends on the feature count d
/// and may have fewer distinct values when d is small.
inline std::vector<double> default_grid(Family f, std::size_t d) {
    switch (f) {
        case Family::NB: return {1e-9, 1e-7, 1e-5, 1e-3, 1e-1};
        case Family::KNN: return {5, 7, 9, 11, 13};
        case Family::TREE: return {0.0, 0.002, 0.005, 0.01, 0.02};
        case Family::SVM_LINEAR: return {0.25, 0.5, 1, 2, 4};
        case Family::MLP: return {1, 3, 5, 7, 9};
        case Family::RF: {
            const double dd = static_cast<double>(std::max<std::size_t>(d, 1));
            const double s = std::ceil(std::sqrt(dd));
            std::vector<double> g{1.0, std::round((1.0 + s) / 2.0), s, std::round((s + dd) / 2.0), dd};
            std::vector<double> out;
            for (double v : g)
                if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
            return out;
        }
        case Family::BOOST: return {10, 20, 30, 40, 50};
    }
    return {};
}

struct ClassifierSpec {
    Family family = Family::NB;
    std::vector<double> grid;
    std::uint64_t seed = 0;
};

inline std::unique_ptr<Model> train(Family f, double param, const Eigen::MatrixXd& X, const std::vector<int>& y,
                                    std::uint64_t seed) {
    if (X.rows() != static_cast<Eigen::Index>(y.size())) throw TrainError("row count does not match label count");
    require_two_classes(y);
    switch (f) {
        case Family::NB: return std::make_unique<GaussianNB>(GaussianNB::fit(X, y, param));
        case Family::KNN: return std::make_unique<Knn>(Knn::fit(X, y, static_cast<int>(param)));
        case Family::TREE: {
            TreeParams p;
            p.ccp_alpha = param;
            return std::make_unique<DecisionTree>(DecisionTree::fit(X, y, p));
        }
        case Family::SVM_LINEAR: return std::make_unique<LinearSvm>(LinearSvm::fit(X, y, param, seed));
        case Family::MLP: return std::make_unique<Mlp>(Mlp::fit(X, y, static_cast<int>(param), seed));
        case Family::RF:
            return std::make_unique<RandomForest>(RandomForest::fit(X, y, static_cast<std::size_t>(param), seed));
        case Family::BOOST: return std::make_unique<AdaBoost>(AdaBoost::fit(X, y, static_cast<int>(param)));
    }
    throw TrainError("unknown classifier family");
}

}  // namespace biocomp::learn
