#include "psymort/forest.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "psymort/errors.hpp"
#include "psymort/rng.hpp"

namespace psymort {

double gini_impurity(std::int64_t count0, std::int64_t count1) {
    const std::int64_t n = count0 + count1;
    if (n == 0) return 0.0;
    const double p0 = static_cast<double>(count0) / static_cast<double>(n);
    const double p1 = static_cast<double>(count1) / static_cast<double>(n);
    return 1.0 - p0 * p0 - p1 * p1;
}

std::optional<SplitChoice> best_split(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                                      std::span<const std::size_t> rows,
                                      std::span<const std::size_t> candidate_features) {
    std::int64_t total0 = 0, total1 = 0;
    for (const std::size_t r : rows) {
        if (y[r]) ++total1;
        else ++total0;
    }
    const double parent = gini_impurity(total0, total1);
    const double n = static_cast<double>(rows.size());

    std::optional<SplitChoice> best;
    for (const std::size_t feature : candidate_features) {
        std::int64_t right0 = 0, right1 = 0;  // rows with the feature set
        for (const std::size_t r : rows) {
            if (!x.get(r, feature)) continue;
            if (y[r]) ++right1;
            else ++right0;
        }
        const std::int64_t left0 = total0 - right0;
        const std::int64_t left1 = total1 - right1;
        const std::int64_t left_n = left0 + left1;
        const std::int64_t right_n = right0 + right1;
        if (left_n == 0 || right_n == 0) continue;  // feature constant here
        const double weighted = (static_cast<double>(left_n) / n) * gini_impurity(left0, left1) +
                                (static_cast<double>(right_n) / n) * gini_impurity(right0, right1);
        const double gain = parent - weighted;
        if (gain <= 0.0) continue;
        if (!best || gain > best->gain) best = SplitChoice{feature, gain};
    }
    return best;
}

namespace {

/// Floyd's algorithm: k distinct draws from [0, d), returned sorted.
std::vector<std::size_t> sample_features(Rng& rng, std::size_t d, std::size_t k) {
    if (k >= d) {
        std::vector<std::size_t> all(d);
        for (std::size_t i = 0; i < d; ++i) all[i] = i;
        return all;
    }
    std::unordered_set<std::size_t> chosen;
    for (std::size_t j = d - k; j < d; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
        chosen.insert(chosen.contains(t) ? j : t);
    }
    std::vector<std::size_t> features(chosen.begin(), chosen.end());
    std::sort(features.begin(), features.end());
    return features;
}

struct PendingNode {
    int node = 0;
    int depth = 0;
    std::vector<std::size_t> rows;
};

DecisionTree build_tree(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                        std::vector<std::size_t> root_rows, const RfOptions& opts,
                        std::size_t features_per_split, Rng& feature_rng) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<PendingNode> stack;
    stack.push_back({0, 0, std::move(root_rows)});

    while (!stack.empty()) {
        PendingNode item = std::move(stack.back());
        stack.pop_back();

        std::int64_t count0 = 0, count1 = 0;
        for (const std::size_t r : item.rows) {
            if (y[r]) ++count1;
            else ++count0;
        }
        TreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
        node.count0 = count0;
        node.count1 = count1;

        const bool pure = count0 == 0 || count1 == 0;
        const bool depth_capped = opts.max_depth > 0 && item.depth >= opts.max_depth;
        if (pure || depth_capped ||
            item.rows.size() < 2 * static_cast<std::size_t>(opts.min_leaf)) {
            continue;  // leaf
        }

        const auto candidates = sample_features(feature_rng, x.cols(), features_per_split);
        const auto split = best_split(x, y, item.rows, candidates);
        if (!split) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (const std::size_t r : item.rows) {
            (x.get(r, split->feature) ? right_rows : left_rows).push_back(r);
        }
        if (left_rows.size() < static_cast<std::size_t>(opts.min_leaf) ||
            right_rows.size() < static_cast<std::size_t>(opts.min_leaf)) {
            continue;
        }

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& parent = tree.nodes[static_cast<std::size_t>(item.node)];
        parent.feature = static_cast<int>(split->feature);
        parent.left = left_id;
        parent.right = right_id;
        // Right child is pushed first so the left subtree is laid out first.
        stack.push_back({right_id, item.depth + 1, std::move(right_rows)});
        stack.push_back({left_id, item.depth + 1, std::move(left_rows)});
    }
    return tree;
}

}  // namespace

int DecisionTree::predict(const FeatureMatrix& x, std::size_t row) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
        at = static_cast<std::size_t>(x.get(row, static_cast<std::size_t>(nodes[at].feature))
                                          ? nodes[at].right
                                          : nodes[at].left);
    }
    return nodes[at].count1 > nodes[at].count0 ? 1 : 0;
}

RfModel rf_train(const FeatureMatrix& x, std::span<const std::uint8_t> y, const RfOptions& opts,
                 std::uint64_t seed) {
    if (x.rows() != y.size() || x.rows() < 2) {
        throw UsageError("random forest needs at least two labeled rows");
    }
    if (opts.n_trees < 1) throw UsageError("random forest needs n_trees >= 1");

    const std::size_t d = x.cols();
    const std::size_t features_per_split =
        opts.max_features == RfOptions::MaxFeatures::all
            ? d
            : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

    RfModel model;
    model.n_features = d;
    model.trees.reserve(static_cast<std::size_t>(opts.n_trees));
    for (int t = 0; t < opts.n_trees; ++t) {
        std::vector<std::size_t> rows;
        rows.reserve(x.rows());
        if (opts.bootstrap) {
            Rng boot(derive_seed(seed, "rf_bootstrap", static_cast<std::uint64_t>(t)));
            for (std::size_t i = 0; i < x.rows(); ++i) {
                rows.push_back(static_cast<std::size_t>(boot.below(x.rows())));
            }
        } else {
            for (std::size_t i = 0; i < x.rows(); ++i) rows.push_back(i);
        }
        Rng feature_rng(derive_seed(seed, "rf_features", static_cast<std::uint64_t>(t)));
        model.trees.push_back(build_tree(x, y, std::move(rows), opts, features_per_split,
                                         feature_rng));
    }
    return model;
}

std::vector<double> rf_score(const RfModel& model, const FeatureMatrix& x) {
    if (x.cols() != model.n_features) {
        throw UsageError("feature width mismatch: model expects " +
                         std::to_string(model.n_features) + ", matrix has " +
                         std::to_string(x.cols()));
    }
    std::vector<double> scores(x.rows(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        int votes = 0;
        for (const auto& tree : model.trees) votes += tree.predict(x, r);
        scores[r] = static_cast<double>(votes) / static_cast<double>(model.trees.size());
    }
    return scores;
}

}  // namespace psymort
