#include "psymort/models.hpp"

#include <fstream>

#include "json.hpp"
#include "psymort/errors.hpp"

namespace psymort {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;

ordered_json matrix_to_json(const FeatureMatrix& m) {
    ordered_json doc;
    doc["columns"] = m.column_names();
    doc["rows"] = m.rows();
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        ordered_json set_cols = ordered_json::array();
        m.for_each_set(r, [&](std::size_t col) { set_cols.push_back(col); });
        rows.push_back(std::move(set_cols));
    }
    doc["set_columns"] = std::move(rows);
    doc["row_ids"] = m.row_ids;
    return doc;
}

FeatureMatrix matrix_from_json(const json& doc) {
    std::vector<std::string> columns = doc.at("columns").get<std::vector<std::string>>();
    const std::size_t n_rows = doc.at("rows").get<std::size_t>();
    FeatureMatrix m(std::move(columns), n_rows);
    const auto& rows = doc.at("set_columns");
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (const auto& col : rows.at(r)) m.set(r, col.get<std::size_t>());
    }
    m.row_ids = doc.at("row_ids").get<std::vector<std::int64_t>>();
    return m;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::logistic_regression: return "lr";
        case Algorithm::random_forest: return "rf";
        case Algorithm::svm_rbf: return "svm";
        case Algorithm::knn: return "knn";
    }
    return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "lr") return Algorithm::logistic_regression;
    if (name == "rf") return Algorithm::random_forest;
    if (name == "svm") return Algorithm::svm_rbf;
    if (name == "knn") return Algorithm::knn;
    throw UsageError("unknown algorithm: " + name + " (expected lr, rf, svm or knn)");
}

ModelSpec ModelSpec::defaults(Algorithm a, std::uint64_t seed) {
    ModelSpec spec;
    spec.algorithm = a;
    spec.seed = seed;
    return spec;
}

Algorithm algorithm_of(const TrainedModel& model) {
    switch (model.index()) {
        case 0: return Algorithm::logistic_regression;
        case 1: return Algorithm::random_forest;
        case 2: return Algorithm::svm_rbf;
        default: return Algorithm::knn;
    }
}

std::size_t model_width(const TrainedModel& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LrModel>) return m.weights.size();
            else if constexpr (std::is_same_v<T, RfModel>) return m.n_features;
            else if constexpr (std::is_same_v<T, SvmModel>) return m.support.cols();
            else return m.train.cols();
        },
        model);
}

TrainedModel fit(const ModelSpec& spec, const FeatureMatrix& x,
                 std::span<const std::uint8_t> y) {
    switch (spec.algorithm) {
        case Algorithm::logistic_regression: return lr_train(x, y, spec.lr);
        case Algorithm::random_forest: return rf_train(x, y, spec.rf, spec.seed);
        case Algorithm::svm_rbf: return smo_train(x, y, spec.svm);
        case Algorithm::knn: return knn_train(x, y, spec.knn);
    }
    throw UsageError("unknown algorithm in model spec");
}

std::vector<double> score(const TrainedModel& model, const FeatureMatrix& x) {
    return std::visit(
        [&x](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LrModel>) return lr_score(m, x);
            else if constexpr (std::is_same_v<T, RfModel>) return rf_score(m, x);
            else if constexpr (std::is_same_v<T, SvmModel>) return svm_score(m, x);
            else return knn_score(m, x);
        },
        model);
}

std::string model_to_json(const TrainedModel& model) {
    ordered_json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["algorithm"] = algorithm_name(algorithm_of(model));

    std::visit(
        [&doc](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            ordered_json params;
            if constexpr (std::is_same_v<T, LrModel>) {
                params["weights"] = m.weights;
                params["bias"] = m.bias;
            } else if constexpr (std::is_same_v<T, RfModel>) {
                params["n_features"] = m.n_features;
                ordered_json trees = ordered_json::array();
                for (const auto& tree : m.trees) {
                    ordered_json nodes = ordered_json::array();
                    for (const auto& node : tree.nodes) {
                        nodes.push_back({{"feature", node.feature},
                                         {"left", node.left},
                                         {"right", node.right},
                                         {"count0", node.count0},
                                         {"count1", node.count1}});
                    }
                    trees.push_back(std::move(nodes));
                }
                params["trees"] = std::move(trees);
            } else if constexpr (std::is_same_v<T, SvmModel>) {
                params["support"] = matrix_to_json(m.support);
                params["alpha_y"] = m.alpha_y;
                params["bias"] = m.bias;
                params["gamma"] = m.gamma;
            } else {
                params["train"] = matrix_to_json(m.train);
                params["labels"] = m.train_labels;
                params["k"] = m.k;
            }
            doc["parameters"] = std::move(params);
        },
        model);
    return doc.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (doc.value("format_version", 0) != kModelFormatVersion) {
        throw UsageError("unsupported model format_version");
    }
    const Algorithm algorithm = algorithm_from_name(doc.at("algorithm").get<std::string>());
    const json& params = doc.at("parameters");
    switch (algorithm) {
        case Algorithm::logistic_regression: {
            LrModel m;
            m.weights = params.at("weights").get<std::vector<double>>();
            m.bias = params.at("bias").get<double>();
            return m;
        }
        case Algorithm::random_forest: {
            RfModel m;
            m.n_features = params.at("n_features").get<std::size_t>();
            for (const auto& tree_doc : params.at("trees")) {
                DecisionTree tree;
                for (const auto& node_doc : tree_doc) {
                    TreeNode node;
                    node.feature = node_doc.at("feature").get<int>();
                    node.left = node_doc.at("left").get<int>();
                    node.right = node_doc.at("right").get<int>();
                    node.count0 = node_doc.at("count0").get<std::int64_t>();
                    node.count1 = node_doc.at("count1").get<std::int64_t>();
                    tree.nodes.push_back(node);
                }
                m.trees.push_back(std::move(tree));
            }
            return m;
        }
        case Algorithm::svm_rbf: {
            SvmModel m;
            m.support = matrix_from_json(params.at("support"));
            m.alpha_y = params.at("alpha_y").get<std::vector<double>>();
            m.bias = params.at("bias").get<double>();
            m.gamma = params.at("gamma").get<double>();
            return m;
        }
        case Algorithm::knn: {
            KnnModel m;
            m.train = matrix_from_json(params.at("train"));
            m.train_labels = params.at("labels").get<std::vector<std::uint8_t>>();
            m.k = params.at("k").get<int>();
            return m;
        }
    }
    throw UsageError("unknown algorithm in model file");
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << model_to_json(model);
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace psymort
