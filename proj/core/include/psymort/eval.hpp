#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "psymort/models.hpp"

namespace psymort {

struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> assignment;  // row index -> fold id

    std::vector<std::size_t> fold_rows(int fold) const;
    std::vector<std::size_t> complement_rows(int fold) const;
};

/// Seeded shuffle split into k folds whose sizes differ by at most one.
/// Stratified mode additionally balances class counts per fold within one
/// row (labels required then). Throws UsageError when n < k or k < 2.
FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed, bool stratified = false,
                     std::span<const std::uint8_t> y = {});

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // (0,0) first, (1,1) last, monotone
};

/// ROC curve with one point per distinct score threshold, descending; tied
/// scores move together. The (0,0) anchor carries threshold +infinity.
/// Throws MetricError unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> y);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

struct AlgorithmEval {
    std::string algorithm;
    std::vector<double> fold_auc;
    double mean_auc = 0.0;
    std::vector<RocCurve> fold_curves;
    /// Vertical average of the fold curves at 101 evenly spaced FPR points.
    RocCurve mean_curve;
};

struct EvalReport {
    int k = 0;
    std::uint64_t seed = 0;
    bool stratified = false;
    bool fit_global = false;
    std::vector<AlgorithmEval> algorithms;
};

struct CvOptions {
    int k = 5;
    std::uint64_t seed = 0;
    bool stratified = false;
    /// Fit encoders once on the whole cohort instead of per training fold.
    bool fit_global = false;
    /// Test-only hook invoked per fold with the fitted space and row split.
    std::function<void(int fold, const FeatureSpace& space,
                       std::span<const std::size_t> train_rows,
                       std::span<const std::size_t> test_rows)>
        fold_observer;
};

using FitFn = std::function<TrainedModel(const FeatureMatrix&, std::span<const std::uint8_t>)>;

/// Shuffled k-fold protocol: per fold, fit the feature space on the training
/// rows (unless fit_global), transform both splits, train, score the test
/// rows, and compute ROC/AUC. Fold failures surface as FoldError carrying
/// the fold id. Model seeds derive from opts.seed per fold, so the report is
/// reproducible and schedule-independent.
AlgorithmEval cross_validate(const ModelSpec& spec, std::span<const CohortEntry> cohort,
                             const CvOptions& opts);

/// Same protocol with an arbitrary training function (the spec's seed fan-out
/// does not apply; the callable sees each fold's training matrix directly).
AlgorithmEval cross_validate_with(const FitFn& fit_fn, const std::string& name,
                                  std::span<const CohortEntry> cohort, const CvOptions& opts);

/// Report JSON: per-algorithm fold AUCs and means plus the CV settings.
void write_eval_report_json(const EvalReport& report, const std::filesystem::path& path);

/// ROC points CSV: ALGORITHM,FOLD,FPR,TPR,THRESHOLD. Mean-curve rows use
/// fold "avg" and an empty threshold.
void write_roc_points_csv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace psymort
