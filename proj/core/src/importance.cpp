#include "psymort/importance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "psymort/csv.hpp"
#include "psymort/errors.hpp"
#include "psymort/eval.hpp"
#include "psymort/rng.hpp"

namespace psymort {

namespace {

void sort_entries(std::vector<ImportanceEntry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const ImportanceEntry& a, const ImportanceEntry& b) {
                  if (a.mean_importance != b.mean_importance) {
                      return a.mean_importance > b.mean_importance;
                  }
                  return a.feature < b.feature;
              });
}

}  // namespace

ImportanceReport permutation_importance(const TrainedModel& model, const FeatureMatrix& x,
                                        std::span<const std::uint8_t> y, int n_repeats,
                                        std::uint64_t seed) {
    if (n_repeats < 1) throw UsageError("permutation importance needs n_repeats >= 1");
    if (x.cols() != model_width(model)) {
        throw UsageError("permutation importance: matrix width does not match the model");
    }

    ImportanceReport report;
    report.n_repeats = n_repeats;
    report.seed = seed;
    report.baseline_auc = auc(roc_curve(score(model, x), y));

    FeatureMatrix work = x;
    std::vector<std::size_t> perm(x.rows());
    std::vector<std::uint8_t> shuffled(x.rows());

    for (std::size_t feature = 0; feature < x.cols(); ++feature) {
        const std::vector<std::uint8_t> original = x.extract_column(feature);
        ImportanceEntry entry;
        entry.feature = x.column_names()[feature];
        for (int repeat = 0; repeat < n_repeats; ++repeat) {
            // Dedicated stream per (feature, repeat) pair: evaluation order
            // cannot influence the draws.
            Rng rng(derive_seed(seed, "permutation", feature,
                                static_cast<std::uint64_t>(repeat)));
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            rng.shuffle(perm);
            for (std::size_t r = 0; r < perm.size(); ++r) shuffled[r] = original[perm[r]];
            work.assign_column(feature, shuffled);
            entry.repeat_auc.push_back(auc(roc_curve(score(model, work), y)));
        }
        work.assign_column(feature, original);

        // Mean anchored at the first repeat: identical repeats (a permuted
        // constant column reproduces the baseline bit-for-bit) average to
        // exactly their common value, so the importance is exactly zero.
        double delta_sum = 0.0;
        for (const double v : entry.repeat_auc) delta_sum += v - entry.repeat_auc[0];
        const double mean_auc =
            entry.repeat_auc[0] + delta_sum / static_cast<double>(n_repeats);
        entry.mean_importance = report.baseline_auc - mean_auc;
        double var = 0.0;
        for (const double v : entry.repeat_auc) var += (v - mean_auc) * (v - mean_auc);
        entry.std_dev = std::sqrt(var / static_cast<double>(n_repeats));
        report.entries.push_back(std::move(entry));
    }
    sort_entries(report.entries);
    return report;
}

ImportanceReport top_features(const ImportanceReport& report, std::size_t k) {
    if (k < 1) throw UsageError("top_features: k must be >= 1");
    ImportanceReport truncated = report;
    if (truncated.entries.size() > k) truncated.entries.resize(k);
    return truncated;
}

std::map<std::string, std::string> load_code_names(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open code-name lookup " + path.string());
    CsvReader reader(in);
    const auto header = reader.next_record();
    if (!header || header->size() < 2) {
        throw UsageError("code-name lookup needs a CODE,NAME header");
    }
    std::map<std::string, std::string> names;
    while (auto row = reader.next_record()) {
        if (row->size() < 2) continue;
        names[(*row)[0]] = (*row)[1];
    }
    return names;
}

ImportanceReport apply_code_names(const ImportanceReport& report,
                                  const std::map<std::string, std::string>& names) {
    ImportanceReport renamed = report;
    for (auto& entry : renamed.entries) {
        for (const char* prefix : {"drug:", "proc:"}) {
            if (entry.feature.starts_with(prefix)) {
                const auto it = names.find(entry.feature.substr(std::strlen(prefix)));
                if (it != names.end()) entry.feature = it->second;
                break;
            }
        }
    }
    sort_entries(renamed.entries);
    return renamed;
}

void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "FEATURE,MEAN_IMPORTANCE,STD,N_REPEATS\n";
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& entry : report.entries) {
        const std::string row[] = {entry.feature, num(entry.mean_importance), num(entry.std_dev),
                                   std::to_string(report.n_repeats)};
        write_csv_row(out, row);
    }
}

void write_importance_json(const ImportanceReport& report, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["format_version"] = 1;
    doc["metric"] = report.metric;
    doc["n_repeats"] = report.n_repeats;
    doc["seed"] = report.seed;
    doc["baseline_auc"] = report.baseline_auc;
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (const auto& entry : report.entries) {
        features.push_back({{"feature", entry.feature},
                            {"mean_importance", entry.mean_importance},
                            {"std", entry.std_dev}});
    }
    doc["features"] = std::move(features);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace psymort
