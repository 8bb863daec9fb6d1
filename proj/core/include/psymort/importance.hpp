#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "psymort/models.hpp"

namespace psymort {

struct ImportanceEntry {
    std::string feature;
    double mean_importance = 0.0;   // baseline AUC minus mean permuted AUC
    double std_dev = 0.0;           // population std across repeats
    std::vector<double> repeat_auc; // permuted AUC per repeat
};

struct ImportanceReport {
    std::vector<ImportanceEntry> entries;  // descending mean, ties by name
    int n_repeats = 0;
    std::uint64_t seed = 0;
    std::string metric = "roc_auc";
    double baseline_auc = 0.0;
};

/// Permutation importance under ROC-AUC: for each column, the baseline AUC
/// minus the mean AUC after permuting that column, over n_repeats seeded
/// shuffles. Each (feature, repeat) pair draws from its own stream keyed by
/// the pair, so results do not depend on evaluation order. Importances may
/// be negative; nothing is clamped.
ImportanceReport permutation_importance(const TrainedModel& model, const FeatureMatrix& x,
                                        std::span<const std::uint8_t> y, int n_repeats,
                                        std::uint64_t seed);

/// First k rows; ties on mean importance resolve alphabetically.
ImportanceReport top_features(const ImportanceReport& report, std::size_t k);

/// CODE,NAME lookup used to render drug/procedure columns with readable
/// names. Missing codes keep their raw feature name.
std::map<std::string, std::string> load_code_names(const std::filesystem::path& path);
ImportanceReport apply_code_names(const ImportanceReport& report,
                                  const std::map<std::string, std::string>& names);

/// CSV: FEATURE,MEAN_IMPORTANCE,STD,N_REPEATS.
void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path);
void write_importance_json(const ImportanceReport& report, const std::filesystem::path& path);

}  // namespace psymort
