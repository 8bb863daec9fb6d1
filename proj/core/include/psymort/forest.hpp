#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psymort/features.hpp"

namespace psymort {

struct RfOptions {
    int n_trees = 100;
    bool bootstrap = true;
    /// Candidate features per split: floor(sqrt(d)) or all d.
    enum class MaxFeatures { sqrt, all };
    MaxFeatures max_features = MaxFeatures::sqrt;
    int max_depth = 0;  // 0 = unlimited
    int min_leaf = 1;
};

/// Binary-feature CART node. The only threshold on {0,1} features is 0.5:
/// value 0 goes left, 1 goes right. Leaves keep their training class counts.
struct TreeNode {
    int feature = -1;   // -1 marks a leaf
    int left = -1;
    int right = -1;
    std::int64_t count0 = 0;
    std::int64_t count1 = 0;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    /// Majority vote of the reached leaf; a tied leaf votes 0.
    int predict(const FeatureMatrix& x, std::size_t row) const;
};

struct RfModel {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
};

/// 1 - p0^2 - p1^2 over the two-class counts; 0 for an empty node.
double gini_impurity(std::int64_t count0, std::int64_t count1);

struct SplitChoice {
    std::size_t feature = 0;
    double gain = 0.0;
};

/// Best Gini split among the candidate features over the given rows
/// (duplicates allowed, as produced by bootstrap). Only strictly positive
/// gains qualify; ties resolve to the smallest feature index. Returns
/// nullopt when no candidate feature separates the rows.
std::optional<SplitChoice> best_split(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                                      std::span<const std::size_t> rows,
                                      std::span<const std::size_t> candidate_features);

/// Bagged Gini trees; per-tree bootstrap and feature-subsample draws come
/// from streams derived from the seed, so the forest is reproducible
/// regardless of construction order.
RfModel rf_train(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                 const RfOptions& opts, std::uint64_t seed);

/// Fraction of trees voting class 1.
std::vector<double> rf_score(const RfModel& model, const FeatureMatrix& x);

}  // namespace psymort
