#include "doctest.h"
#include "psymort/errors.hpp"
#include "psymort/knn.hpp"
#include "psymort/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace psymort;

TEST_SUITE("knn") {

TEST_CASE("five nearest with labels 1,1,1,0,0 score 0.6") {
    FeatureMatrix train({"a", "b", "c", "d", "e", "f", "g", "h"}, 7);
    // row 0: distance 0; rows 1-2: distance 1; rows 3-4: distance 2;
    // rows 5-6: distance 4 (never selected)
    train.set(1, 0);
    train.set(2, 1);
    train.set(3, 0);
    train.set(3, 1);
    train.set(4, 2);
    train.set(4, 3);
    for (std::size_t c = 4; c < 8; ++c) {
        train.set(5, c);
        train.set(6, c);
    }
    const std::vector<std::uint8_t> y = {1, 1, 1, 0, 0, 1, 1};
    const KnnModel model = knn_train(train, y, KnnOptions{5});

    FeatureMatrix query({"a", "b", "c", "d", "e", "f", "g", "h"}, 1);
    const auto scores = knn_score(model, query);
    CHECK(scores[0] == doctest::Approx(0.6));
}

TEST_CASE("distance ties resolve to the smaller training index") {
    FeatureMatrix train({"a", "b", "c"}, 3);
    train.set(0, 0);  // all three rows at distance 1 from the zero query
    train.set(1, 1);
    train.set(2, 2);
    const std::vector<std::uint8_t> y = {0, 1, 1};
    const KnnModel model = knn_train(train, y, KnnOptions{2});
    FeatureMatrix query({"a", "b", "c"}, 1);
    // neighbors are rows 0 and 1, not 1 and 2
    CHECK(knn_score(model, query)[0] == doctest::Approx(0.5));
}

TEST_CASE("scores match the naive all-pairs oracle on random instances") {
    Rng rng(60);
    for (int instance = 0; instance < 10; ++instance) {
        const std::size_t n_train = 10 + rng.below(60);
        const std::size_t n_query = 5 + rng.below(20);
        const std::size_t d = 4 + rng.below(12);
        const FeatureMatrix train = fixtures::random_matrix(rng, n_train, d, 0.4);
        const FeatureMatrix queries = fixtures::random_matrix(rng, n_query, d, 0.4);
        const auto y = fixtures::random_labels(rng, n_train, 0.5);

        const KnnModel model = knn_train(train, y, KnnOptions{5});
        const auto fast = knn_score(model, queries);
        const auto naive = oracles::naive_knn_scores(train, y, queries, 5);
        REQUIRE(fast.size() == naive.size());
        for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == naive[i]);
    }
}

TEST_CASE("k validation") {
    Rng rng(61);
    const FeatureMatrix x = fixtures::random_matrix(rng, 4, 3, 0.5);
    const std::vector<std::uint8_t> y = {1, 0, 1, 0};
    CHECK_THROWS_AS(knn_train(x, y, KnnOptions{0}), UsageError);
    CHECK_THROWS_AS(knn_train(x, y, KnnOptions{5}), UsageError);
    CHECK_NOTHROW(knn_train(x, y, KnnOptions{4}));
}

TEST_CASE("width mismatch at scoring is a usage error") {
    Rng rng(62);
    const FeatureMatrix x = fixtures::random_matrix(rng, 6, 4, 0.5);
    const std::vector<std::uint8_t> y = {1, 0, 1, 0, 1, 0};
    const KnnModel model = knn_train(x, y, KnnOptions{3});
    const FeatureMatrix narrow = fixtures::random_matrix(rng, 2, 3, 0.5);
    CHECK_THROWS_AS(knn_score(model, narrow), UsageError);
}

TEST_CASE("scores are permutation equivariant") {
    Rng rng(63);
    const FeatureMatrix train = fixtures::random_matrix(rng, 30, 6, 0.4);
    const auto y = fixtures::random_labels(rng, 30, 0.5);
    const FeatureMatrix queries = fixtures::random_matrix(rng, 12, 6, 0.4);
    const KnnModel model = knn_train(train, y, KnnOptions{5});
    const auto direct = knn_score(model, queries);
    std::vector<std::size_t> perm = {11, 3, 7, 0, 9, 5, 1, 10, 2, 8, 4, 6};
    const auto permuted = knn_score(model, queries.take_rows(perm));
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i] == direct[perm[i]]);
}

}  // TEST_SUITE
