#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psymort/features.hpp"

namespace psymort {

struct SvmOptions {
    double c = 1.0;
    /// Kernel width; unset selects 1/(d * var(X)) from the training matrix
    /// (1/d when the matrix is constant).
    std::optional<double> gamma;
    double tol = 1e-3;
    /// Iteration budget: max_passes * n pairwise updates.
    int max_passes = 100;
    /// Kernel row cache budget. Large enough that training sets up to ~8k
    /// rows never recompute; bigger problems fall back to LRU eviction.
    std::size_t cache_mb = 256;
};

/// RBF-kernel SVM in support-vector form: f(x) = sum_i alpha_y[i]*K(sv_i, x) + bias.
struct SvmModel {
    FeatureMatrix support;           // rows with alpha > 0
    std::vector<double> alpha_y;     // alpha_i * y_i per support row
    double bias = 0.0;
    double gamma = 1.0;
};

/// exp(-gamma * ||a - b||^2) over real-valued rows.
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Same kernel over binary matrix rows, where ||a-b||^2 is the Hamming distance.
double rbf_kernel(const FeatureMatrix& xa, std::size_t row_a, const FeatureMatrix& xb,
                  std::size_t row_b, double gamma);

/// Diagnostics captured during training (alphas indexed like the training
/// rows; objective_trace filled only when track_objective is set).
struct SmoStats {
    std::vector<double> alphas;
    double bias = 0.0;
    double gamma = 1.0;
    long pair_updates = 0;
    double final_gap = 0.0;
    std::vector<double> objective_trace;
    bool track_objective = false;
};

/// Sequential minimal optimization over the RBF dual with max-violating-pair
/// working-set selection. Stops when the KKT gap is within 2*tol; throws
/// ConvergenceError (reporting the remaining KKT violations) if the budget
/// of max_passes * n updates runs out first, and TrainError on single-class
/// input.
SvmModel smo_train(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                   const SvmOptions& opts = {}, SmoStats* stats = nullptr);

/// Raw decision values; a monotone ranking score (no calibration).
std::vector<double> svm_score(const SvmModel& model, const FeatureMatrix& x);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double svm_dual_objective(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                          std::span<const double> alphas, double gamma);

/// Number of training points violating their KKT condition by more than tol.
int count_kkt_violations(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                         std::span<const double> alphas, double bias, double gamma,
                         double c, double tol);

}  // namespace psymort
