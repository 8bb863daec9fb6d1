#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "psymort/forest.hpp"
#include "psymort/knn.hpp"
#include "psymort/linear.hpp"
#include "psymort/svm.hpp"

namespace psymort {

enum class Algorithm { logistic_regression, random_forest, svm_rbf, knn };

/// Short stable names used in CLI flags, report keys and file names.
std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);  // throws UsageError

struct ModelSpec {
    Algorithm algorithm = Algorithm::logistic_regression;
    LrOptions lr;
    RfOptions rf;
    SvmOptions svm;
    KnnOptions knn;
    std::uint64_t seed = 0;

    static ModelSpec defaults(Algorithm a, std::uint64_t seed = 0);
};

using TrainedModel = std::variant<LrModel, RfModel, SvmModel, KnnModel>;

Algorithm algorithm_of(const TrainedModel& model);
std::size_t model_width(const TrainedModel& model);

/// Trains the spec'd algorithm. LR and SVM require both classes present.
/// Deterministic given the spec's seed.
TrainedModel fit(const ModelSpec& spec, const FeatureMatrix& x,
                 std::span<const std::uint8_t> y);

/// Continuous risk scores, higher = more likely positive. Throws UsageError
/// when the matrix width differs from the training width.
std::vector<double> score(const TrainedModel& model, const FeatureMatrix& x);

/// Versioned JSON serialization; round-trips scores exactly.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace psymort
