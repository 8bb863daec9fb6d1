#include <cmath>

#include "doctest.h"
#include "psymort/errors.hpp"
#include "psymort/linear.hpp"
#include "psymort/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace psymort;

TEST_SUITE("linear") {

TEST_CASE("zero weights score one half everywhere") {
    Rng rng(3);
    const FeatureMatrix x = fixtures::random_matrix(rng, 8, 5, 0.4);
    LrModel model;
    model.weights.assign(5, 0.0);
    for (const double s : lr_score(model, x)) CHECK(s == doctest::Approx(0.5));
}

TEST_CASE("bias gradient vanishes for zero weights on balanced labels") {
    Rng rng(4);
    const FeatureMatrix x = fixtures::random_matrix(rng, 10, 4, 0.5);
    std::vector<std::uint8_t> y = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    const std::vector<double> w(4, 0.0);
    const LrGradient g = lr_gradient(w, 0.0, x, y, 1.0);
    CHECK(g.bias == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(11);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t rows = 5 + rng.below(10);
        const std::size_t cols = 3 + rng.below(5);
        const FeatureMatrix x = fixtures::random_matrix(rng, rows, cols, 0.4);
        const auto y = fixtures::random_labels(rng, rows, 0.4);
        std::vector<double> w(cols);
        for (auto& v : w) v = rng.next_double() * 2.0 - 1.0;
        const double bias = rng.next_double() - 0.5;
        const double l2 = instance % 2 ? 0.7 : 0.0;

        const LrGradient analytic = lr_gradient(w, bias, x, y, l2);
        const LrGradient numeric = oracles::finite_difference_gradient(w, bias, x, y, l2);
        for (std::size_t j = 0; j < cols; ++j) {
            const double denom = std::max(1.0, std::abs(numeric.weights[j]));
            CHECK(std::abs(analytic.weights[j] - numeric.weights[j]) / denom < 1e-5);
        }
        const double denom = std::max(1.0, std::abs(numeric.bias));
        CHECK(std::abs(analytic.bias - numeric.bias) / denom < 1e-5);
    }
}

TEST_CASE("ridge term shifts the gradient by exactly l2 * w") {
    Rng rng(12);
    const FeatureMatrix x = fixtures::random_matrix(rng, 9, 4, 0.5);
    const auto y = fixtures::random_labels(rng, 9, 0.5);
    std::vector<double> w = {0.3, -0.2, 1.1, 0.0};
    const LrGradient bare = lr_gradient(w, 0.1, x, y, 0.0);
    const LrGradient ridged = lr_gradient(w, 0.1, x, y, 0.5);
    for (std::size_t j = 0; j < w.size(); ++j) {
        CHECK(ridged.weights[j] == doctest::Approx(bare.weights[j] + 0.5 * w[j]).epsilon(1e-14));
    }
    CHECK(ridged.bias == bare.bias);
}

TEST_CASE("separable one-feature toy reaches training accuracy 1.0") {
    FeatureMatrix x({"f"}, 100);
    std::vector<std::uint8_t> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        if (i % 2 == 1) {
            x.set(i, 0);
            y[i] = 1;
        }
    }
    const LrModel model = lr_train(x, y);
    const auto scores = lr_score(model, x);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK((scores[i] >= 0.5) == (y[i] == 1));
    }
}

TEST_CASE("single-class labels are a training error") {
    Rng rng(5);
    const FeatureMatrix x = fixtures::random_matrix(rng, 6, 3, 0.5);
    const std::vector<std::uint8_t> y(6, 1);
    CHECK_THROWS_AS(lr_train(x, y), TrainError);
}

TEST_CASE("width mismatch at scoring is a usage error") {
    Rng rng(6);
    const FeatureMatrix x = fixtures::random_matrix(rng, 6, 3, 0.5);
    LrModel model;
    model.weights.assign(4, 0.0);
    CHECK_THROWS_AS(lr_score(model, x), UsageError);
}

TEST_CASE("training converges to a small gradient norm") {
    Rng rng(7);
    const FeatureMatrix x = fixtures::random_matrix(rng, 80, 12, 0.3);
    const auto y = fixtures::random_labels(rng, 80, 0.3);
    const LrModel model = lr_train(x, y);
    const LrGradient g = lr_gradient(model.weights, model.bias, x, y, LrOptions{}.l2);
    double norm = g.bias * g.bias;
    for (const double v : g.weights) norm += v * v;
    CHECK(std::sqrt(norm) <= LrOptions{}.tol);
}

TEST_CASE("scores are permutation equivariant") {
    Rng rng(8);
    const FeatureMatrix x = fixtures::random_matrix(rng, 12, 6, 0.4);
    const auto y = fixtures::random_labels(rng, 12, 0.5);
    const LrModel model = lr_train(x, y);
    const auto direct = lr_score(model, x);

    std::vector<std::size_t> perm = {5, 2, 9, 0, 11, 7, 1, 3, 10, 4, 6, 8};
    const FeatureMatrix shuffled = x.take_rows(perm);
    const auto permuted = lr_score(model, shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(permuted[i] == doctest::Approx(direct[perm[i]]).epsilon(1e-15));
    }
}

}  // TEST_SUITE
