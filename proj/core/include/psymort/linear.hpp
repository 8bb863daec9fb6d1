#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psymort/features.hpp"

namespace psymort {

struct LrOptions {
    /// Initial step; backtracking halves it until the loss decreases, and an
    /// accepted step doubles as the next iteration's starting point.
    double learning_rate = 0.1;
    double l2 = 1.0;   // penalty (l2/2)*||w||^2, bias not penalized
    double tol = 1e-6;  // gradient-norm stopping threshold
    int max_iters = 1000;
};

struct LrModel {
    std::vector<double> weights;
    double bias = 0.0;

    std::size_t n_features() const { return weights.size(); }
};

struct LrGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Mean cross-entropy plus (l2/2)*||w||^2.
double lr_loss(std::span<const double> weights, double bias, const FeatureMatrix& x,
               std::span<const std::uint8_t> y, double l2);

/// Exact gradient of lr_loss in (weights, bias).
LrGradient lr_gradient(std::span<const double> weights, double bias, const FeatureMatrix& x,
                       std::span<const std::uint8_t> y, double l2);

/// Full-batch gradient descent with per-iteration backtracking halving.
/// Throws TrainError on single-class labels and ConvergenceError if the
/// gradient norm has not reached tol within max_iters.
LrModel lr_train(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                 const LrOptions& opts = {});

/// Per-row sigmoid(w.x + b).
std::vector<double> lr_score(const LrModel& model, const FeatureMatrix& x);

}  // namespace psymort
