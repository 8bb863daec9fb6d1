#include "doctest.h"
#include "psymort/errors.hpp"
#include "psymort/forest.hpp"
#include "psymort/rng.hpp"
#include "support/fixtures.hpp"

using namespace psymort;

TEST_SUITE("forest") {

TEST_CASE("gini impurity of two-class counts") {
    CHECK(gini_impurity(5, 5) == doctest::Approx(0.5));
    CHECK(gini_impurity(10, 0) == doctest::Approx(0.0));
    CHECK(gini_impurity(0, 0) == doctest::Approx(0.0));
    CHECK(gini_impurity(3, 1) == doctest::Approx(1.0 - 0.75 * 0.75 - 0.25 * 0.25));
}

TEST_CASE("best split picks the perfectly predictive feature with gain one half") {
    // 4 rows, feature 1 perfectly predicts y, feature 0 is useless.
    FeatureMatrix x({"noise", "signal"}, 4);
    x.set(0, 0);
    x.set(1, 0);
    x.set(0, 1);
    x.set(2, 1);
    const std::vector<std::uint8_t> y = {1, 0, 1, 0};
    const std::vector<std::size_t> rows = {0, 1, 2, 3};
    const std::vector<std::size_t> candidates = {0, 1};
    const auto choice = best_split(x, y, rows, candidates);
    REQUIRE(choice.has_value());
    CHECK(choice->feature == 1);
    CHECK(choice->gain == doctest::Approx(0.5));
}

TEST_CASE("constant features produce no split") {
    FeatureMatrix x({"const"}, 4);
    const std::vector<std::uint8_t> y = {1, 0, 1, 0};
    const std::vector<std::size_t> rows = {0, 1, 2, 3};
    const std::vector<std::size_t> candidates = {0};
    CHECK_FALSE(best_split(x, y, rows, candidates).has_value());
}

TEST_CASE("depth-1 single tree splits the root on the informative feature") {
    Rng rng(40);
    FeatureMatrix x = fixtures::random_matrix(rng, 60, 6, 0.3);
    std::vector<std::uint8_t> y(60);
    for (std::size_t r = 0; r < 60; ++r) {
        const bool value = r % 2 == 0;
        x.set(r, 3, value);  // feature 3 decides the label
        y[r] = value ? 1 : 0;
    }
    RfOptions opts;
    opts.n_trees = 1;
    opts.bootstrap = false;
    opts.max_features = RfOptions::MaxFeatures::all;
    opts.max_depth = 1;
    const RfModel model = rf_train(x, y, opts, 1);
    REQUIRE(model.trees.size() == 1);
    CHECK(model.trees[0].nodes[0].feature == 3);
    CHECK(model.trees[0].nodes.size() == 3);
}

TEST_CASE("a handmade four-tree forest scores vote fractions") {
    // Trees are plain data; build three voting positive and one negative
    // for rows with the feature set.
    DecisionTree positive;
    positive.nodes.push_back({0, 1, 2, 0, 0});
    positive.nodes.push_back({-1, -1, -1, 5, 0});  // left leaf: class 0
    positive.nodes.push_back({-1, -1, -1, 0, 5});  // right leaf: class 1
    DecisionTree negative;
    negative.nodes.push_back({-1, -1, -1, 7, 2});  // single leaf voting 0

    RfModel model;
    model.n_features = 1;
    model.trees = {positive, positive, positive, negative};

    FeatureMatrix x({"f"}, 1);
    x.set(0, 0);
    const auto scores = rf_score(model, x);
    CHECK(scores[0] == doctest::Approx(0.75));
}

TEST_CASE("no bootstrap and a single tree is deterministic CART") {
    Rng rng(41);
    // 20 features keep the 40 rows collision-free, so the tree can be exact.
    const FeatureMatrix x = fixtures::random_matrix(rng, 40, 20, 0.35);
    const auto y = fixtures::random_labels(rng, 40, 0.5);
    for (std::size_t a = 0; a < x.rows(); ++a) {
        for (std::size_t b = a + 1; b < x.rows(); ++b) {
            REQUIRE(FeatureMatrix::hamming(x, a, x, b) > 0);
        }
    }
    RfOptions opts;
    opts.n_trees = 1;
    opts.bootstrap = false;
    opts.max_features = RfOptions::MaxFeatures::all;
    const RfModel a = rf_train(x, y, opts, 7);
    const RfModel b = rf_train(x, y, opts, 99);  // seed only feeds sampling, both unused
    REQUIRE(a.trees.size() == 1);
    REQUIRE(b.trees.size() == 1);
    REQUIRE(a.trees[0].nodes.size() == b.trees[0].nodes.size());
    for (std::size_t i = 0; i < a.trees[0].nodes.size(); ++i) {
        CHECK(a.trees[0].nodes[i].feature == b.trees[0].nodes[i].feature);
    }
    // distinct training rows are fit exactly
    const auto scores = rf_score(a, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        CHECK(scores[r] == doctest::Approx(static_cast<double>(y[r])));
    }
}

TEST_CASE("scores stay inside the unit interval for any tree count") {
    Rng rng(42);
    const FeatureMatrix x = fixtures::random_matrix(rng, 50, 10, 0.3);
    const auto y = fixtures::random_labels(rng, 50, 0.3);
    for (const int n_trees : {1, 5, 33}) {
        RfOptions opts;
        opts.n_trees = n_trees;
        const RfModel model = rf_train(x, y, opts, 3);
        for (const double s : rf_score(model, x)) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("training is reproducible for a fixed seed") {
    Rng rng(43);
    const FeatureMatrix x = fixtures::random_matrix(rng, 60, 12, 0.3);
    const auto y = fixtures::random_labels(rng, 60, 0.4);
    RfOptions opts;
    opts.n_trees = 11;
    const RfModel a = rf_train(x, y, opts, 123);
    const RfModel b = rf_train(x, y, opts, 123);
    CHECK(rf_score(a, x) == rf_score(b, x));
    const RfModel c = rf_train(x, y, opts, 124);
    CHECK(rf_score(a, x) != rf_score(c, x));
}

TEST_CASE("leaf counts are non-negative and sum to the bootstrap size") {
    Rng rng(44);
    const FeatureMatrix x = fixtures::random_matrix(rng, 30, 6, 0.4);
    const auto y = fixtures::random_labels(rng, 30, 0.5);
    RfOptions opts;
    opts.n_trees = 3;
    const RfModel model = rf_train(x, y, opts, 9);
    for (const auto& tree : model.trees) {
        std::int64_t leaf_total = 0;
        for (const auto& node : tree.nodes) {
            CHECK(node.count0 >= 0);
            CHECK(node.count1 >= 0);
            if (node.is_leaf()) leaf_total += node.count0 + node.count1;
        }
        CHECK(leaf_total == 30);
    }
}

TEST_CASE("permutation equivariance of forest scores") {
    Rng rng(45);
    const FeatureMatrix x = fixtures::random_matrix(rng, 20, 7, 0.4);
    const auto y = fixtures::random_labels(rng, 20, 0.5);
    RfOptions opts;
    opts.n_trees = 7;
    const RfModel model = rf_train(x, y, opts, 5);
    const auto direct = rf_score(model, x);
    std::vector<std::size_t> perm(20);
    for (std::size_t i = 0; i < 20; ++i) perm[i] = (i * 7 + 3) % 20;
    const auto permuted = rf_score(model, x.take_rows(perm));
    for (std::size_t i = 0; i < 20; ++i) CHECK(permuted[i] == direct[perm[i]]);
}

}  // TEST_SUITE
