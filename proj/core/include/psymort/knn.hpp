#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psymort/features.hpp"

namespace psymort {

struct KnnOptions {
    int k = 5;
};

/// Memorized training set; scoring is a k-nearest-neighbor vote.
struct KnnModel {
    FeatureMatrix train;
    std::vector<std::uint8_t> train_labels;
    int k = 5;
};

/// Throws UsageError if k < 1 or k exceeds the number of training rows.
KnnModel knn_train(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                   const KnnOptions& opts = {});

/// Fraction of the k nearest training rows (Euclidean distance, distance
/// ties broken by smaller training-row index) labeled 1.
std::vector<double> knn_score(const KnnModel& model, const FeatureMatrix& x);

}  // namespace psymort
