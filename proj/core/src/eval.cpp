#include "psymort/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "psymort/errors.hpp"
#include "psymort/rng.hpp"

namespace psymort {

std::vector<std::size_t> FoldPlan::fold_rows(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldPlan::complement_rows(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) rows.push_back(i);
    }
    return rows;
}

FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed, bool stratified,
                     std::span<const std::uint8_t> y) {
    if (k < 2) throw UsageError("kfold: k must be at least 2");
    if (n < static_cast<std::size_t>(k)) {
        throw UsageError("kfold: fewer rows (" + std::to_string(n) + ") than folds (" +
                         std::to_string(k) + ")");
    }
    if (stratified && y.size() != n) {
        throw UsageError("kfold: stratified mode needs one label per row");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "kfold_shuffle"));
    rng.shuffle(order);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.assign(n, 0);

    if (!stratified) {
        // Contiguous chunks of the shuffled order; the first n%k folds get
        // the extra row.
        const std::size_t base = n / static_cast<std::size_t>(k);
        const std::size_t extra = n % static_cast<std::size_t>(k);
        std::size_t at = 0;
        for (int fold = 0; fold < k; ++fold) {
            const std::size_t size = base + (static_cast<std::size_t>(fold) < extra ? 1 : 0);
            for (std::size_t i = 0; i < size; ++i) plan.assignment[order[at++]] = fold;
        }
    } else {
        // Deal each class round-robin, continuing the fold counter across
        // classes: per-fold class counts and totals both stay within one.
        std::size_t counter = 0;
        for (const int wanted : {1, 0}) {
            for (const std::size_t row : order) {
                if (y[row] != wanted) continue;
                plan.assignment[row] = static_cast<int>(counter++ % static_cast<std::size_t>(k));
            }
        }
    }
    return plan;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> y) {
    if (scores.size() != y.size()) throw UsageError("roc_curve: scores and labels differ in size");
    std::int64_t n_pos = 0, n_neg = 0;
    for (const std::uint8_t label : y) {
        if (label) ++n_pos;
        else ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw MetricError("roc_curve: both classes must be present");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // Rows tied on score move together: one point per distinct score.
        while (i < order.size() && scores[order[i]] == threshold) {
            if (y[order[i]]) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos), threshold});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

namespace {

/// Vertical average of fold curves at 101 evenly spaced FPR points. Each
/// curve's vertical segments collapse to their top before interpolating.
RocCurve mean_roc_curve(std::span<const RocCurve> curves) {
    RocCurve mean;
    if (curves.empty()) return mean;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i <= 100; ++i) {
        const double grid_fpr = static_cast<double>(i) / 100.0;
        double total = 0.0;
        for (const RocCurve& curve : curves) {
            // Collapse ties on fpr to the max tpr, then interpolate linearly.
            double prev_fpr = 0.0, prev_tpr = 0.0, at_tpr = 0.0;
            bool found = false;
            for (std::size_t p = 0; p < curve.points.size() && !found; ++p) {
                double f = curve.points[p].fpr;
                double t = curve.points[p].tpr;
                while (p + 1 < curve.points.size() && curve.points[p + 1].fpr == f) {
                    ++p;
                    t = curve.points[p].tpr;
                }
                if (f >= grid_fpr) {
                    at_tpr = (f == prev_fpr)
                                 ? t
                                 : prev_tpr + (t - prev_tpr) * (grid_fpr - prev_fpr) / (f - prev_fpr);
                    found = true;
                } else {
                    prev_fpr = f;
                    prev_tpr = t;
                }
            }
            total += found ? at_tpr : 1.0;
        }
        mean.points.push_back({grid_fpr, total / static_cast<double>(curves.size()), nan});
    }
    return mean;
}

using FoldFitFn =
    std::function<TrainedModel(int fold, const FeatureMatrix&, std::span<const std::uint8_t>)>;

AlgorithmEval cross_validate_impl(const FoldFitFn& fit_fn, const std::string& name,
                                  std::span<const CohortEntry> cohort, const CvOptions& opts) {
    const std::vector<std::uint8_t> all_labels = labels(cohort);
    const FoldPlan plan =
        kfold_split(cohort.size(), opts.k, opts.seed, opts.stratified, all_labels);

    std::optional<FeatureSpace> global_space;
    if (opts.fit_global) global_space = fit_feature_space(cohort);

    AlgorithmEval eval;
    eval.algorithm = name;
    for (int fold = 0; fold < opts.k; ++fold) {
        const std::vector<std::size_t> test_rows = plan.fold_rows(fold);
        const std::vector<std::size_t> train_rows = plan.complement_rows(fold);
        try {
            std::vector<CohortEntry> train_cohort, test_cohort;
            train_cohort.reserve(train_rows.size());
            test_cohort.reserve(test_rows.size());
            for (const std::size_t r : train_rows) train_cohort.push_back(cohort[r]);
            for (const std::size_t r : test_rows) test_cohort.push_back(cohort[r]);

            const FeatureSpace space =
                opts.fit_global ? *global_space : fit_feature_space(train_cohort);
            if (opts.fold_observer) opts.fold_observer(fold, space, train_rows, test_rows);

            const FeatureMatrix train_x = transform(space, train_cohort);
            const FeatureMatrix test_x = transform(space, test_cohort);
            const std::vector<std::uint8_t> train_y = labels(train_cohort);
            const std::vector<std::uint8_t> test_y = labels(test_cohort);

            const TrainedModel model = fit_fn(fold, train_x, train_y);
            const std::vector<double> scores = score(model, test_x);
            RocCurve curve = roc_curve(scores, test_y);
            eval.fold_auc.push_back(auc(curve));
            eval.fold_curves.push_back(std::move(curve));
        } catch (const FoldError&) {
            throw;
        } catch (const Error& e) {
            throw FoldError(fold, e.what());
        }
    }
    eval.mean_auc = std::accumulate(eval.fold_auc.begin(), eval.fold_auc.end(), 0.0) /
                    static_cast<double>(eval.fold_auc.size());
    eval.mean_curve = mean_roc_curve(eval.fold_curves);
    return eval;
}

}  // namespace

AlgorithmEval cross_validate(const ModelSpec& spec, std::span<const CohortEntry> cohort,
                             const CvOptions& opts) {
    return cross_validate_impl(
        [&spec, &opts](int fold, const FeatureMatrix& x, std::span<const std::uint8_t> y) {
            // Per-fold model stream off the master seed: fold order and any
            // parallel evaluation cannot change results.
            ModelSpec fold_spec = spec;
            fold_spec.seed = derive_seed(opts.seed, "model", static_cast<std::uint64_t>(fold));
            return fit(fold_spec, x, y);
        },
        algorithm_name(spec.algorithm), cohort, opts);
}

AlgorithmEval cross_validate_with(const FitFn& fit_fn, const std::string& name,
                                  std::span<const CohortEntry> cohort, const CvOptions& opts) {
    return cross_validate_impl(
        [&fit_fn](int, const FeatureMatrix& x, std::span<const std::uint8_t> y) {
            return fit_fn(x, y);
        },
        name, cohort, opts);
}

void write_eval_report_json(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["format_version"] = 1;
    doc["folds"] = report.k;
    doc["seed"] = report.seed;
    doc["stratified"] = report.stratified;
    doc["fit_global"] = report.fit_global;
    nlohmann::ordered_json algorithms;
    for (const auto& algo : report.algorithms) {
        nlohmann::ordered_json entry;
        entry["fold_auc"] = algo.fold_auc;
        entry["mean_auc"] = algo.mean_auc;
        algorithms[algo.algorithm] = std::move(entry);
    }
    doc["algorithms"] = std::move(algorithms);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

void write_roc_points_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "ALGORITHM,FOLD,FPR,TPR,THRESHOLD\n";
    char buf[64];
    auto num = [&buf](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& algo : report.algorithms) {
        for (std::size_t fold = 0; fold < algo.fold_curves.size(); ++fold) {
            for (const auto& point : algo.fold_curves[fold].points) {
                out << algo.algorithm << ',' << fold << ',' << num(point.fpr) << ','
                    << num(point.tpr) << ',' << num(point.threshold) << '\n';
            }
        }
        for (const auto& point : algo.mean_curve.points) {
            out << algo.algorithm << ",avg," << num(point.fpr) << ',' << num(point.tpr)
                << ",\n";
        }
    }
}

}  // namespace psymort
