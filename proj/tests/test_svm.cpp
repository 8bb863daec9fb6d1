#include <cmath>

#include "doctest.h"
#include "psymort/errors.hpp"
#include "psymort/rng.hpp"
#include "psymort/svm.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace psymort;

namespace {

FeatureMatrix xor_points() {
    FeatureMatrix x({"a", "b"}, 4);
    x.set(1, 0);
    x.set(1, 1);
    x.set(2, 1);
    x.set(3, 0);
    return x;  // rows: 00, 11, 01, 10
}

const std::vector<std::uint8_t> kXorLabels = {1, 1, 0, 0};

}  // namespace

TEST_SUITE("svm") {

TEST_CASE("rbf kernel closed forms") {
    const std::vector<double> a = {1.0, 0.0, 0.5};
    CHECK(rbf_kernel(a, a, 0.7) == doctest::Approx(1.0));

    const std::vector<double> e1 = {1.0, 0.0};
    const std::vector<double> e2 = {0.0, 1.0};
    CHECK(rbf_kernel(e1, e2, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(rbf_kernel(e1, e2, 50.0) < 1e-40);

    CHECK_THROWS_AS(rbf_kernel(e1, a, 1.0), UsageError);
    CHECK_THROWS_AS(rbf_kernel(e1, e2, 0.0), UsageError);
}

TEST_CASE("binary-row kernel agrees with the dense kernel") {
    Rng rng(50);
    const FeatureMatrix m = fixtures::random_matrix(rng, 6, 9, 0.4);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            std::vector<double> a(9), b(9);
            for (std::size_t c = 0; c < 9; ++c) {
                a[c] = m.get(i, c) ? 1.0 : 0.0;
                b[c] = m.get(j, c) ? 1.0 : 0.0;
            }
            CHECK(rbf_kernel(m, i, m, j, 0.3) ==
                  doctest::Approx(rbf_kernel(a, b, 0.3)).epsilon(1e-14));
        }
    }
}

TEST_CASE("two opposite points become equal-alpha support points") {
    FeatureMatrix x({"a", "b", "c"}, 2);
    x.set(0, 0);
    x.set(1, 1);
    x.set(1, 2);
    const std::vector<std::uint8_t> y = {1, 0};
    SmoStats stats;
    const SvmModel model = smo_train(x, y, SvmOptions{}, &stats);
    REQUIRE(stats.alphas.size() == 2);
    CHECK(stats.alphas[0] == doctest::Approx(stats.alphas[1]).epsilon(1e-12));
    CHECK(stats.alphas[0] > 0.0);
    CHECK(model.support.rows() == 2);
    CHECK(model.bias == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("xor with c=1 uses all four points and fits them") {
    const FeatureMatrix x = xor_points();
    SmoStats stats;
    const SvmModel model = smo_train(x, kXorLabels, SvmOptions{}, &stats);
    CHECK(model.support.rows() == 4);
    const auto scores = svm_score(model, x);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK((scores[i] > 0.0) == (kXorLabels[i] == 1));
    }
}

TEST_CASE("wide-margin pair with room in the box sits exactly on the margin") {
    FeatureMatrix x({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}, 2);
    for (std::size_t c = 0; c < 10; ++c) x.set(1, c);
    const std::vector<std::uint8_t> y = {0, 1};
    SvmOptions opts;
    opts.c = 10.0;
    const SvmModel model = smo_train(x, y, opts);
    const auto scores = svm_score(model, x);
    CHECK(scores[0] <= -1.0 + opts.tol);
    CHECK(scores[0] == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(scores[1] >= 1.0 - opts.tol);
    CHECK(scores[1] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("kkt conditions hold for every training point after convergence") {
    Rng rng(51);
    for (int instance = 0; instance < 8; ++instance) {
        const std::size_t n = 20 + rng.below(60);
        const FeatureMatrix x = fixtures::random_matrix(rng, n, 12, 0.3);
        const auto y = fixtures::random_labels(rng, n, 0.4);
        SmoStats stats;
        const SvmModel model = smo_train(x, y, SvmOptions{}, &stats);
        CHECK(count_kkt_violations(x, y, stats.alphas, stats.bias, stats.gamma, 1.0,
                                   SvmOptions{}.tol) == 0);

        double balance = 0.0;
        for (std::size_t i = 0; i < n; ++i) balance += stats.alphas[i] * (y[i] ? 1.0 : -1.0);
        CHECK(std::abs(balance) < 1e-9);
        for (const double a : stats.alphas) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
        }
        CHECK(model.support.rows() > 0);
    }
}

TEST_CASE("dual objective is non-decreasing across accepted updates") {
    Rng rng(52);
    const FeatureMatrix x = fixtures::random_matrix(rng, 30, 8, 0.35);
    const auto y = fixtures::random_labels(rng, 30, 0.5);
    SmoStats stats;
    stats.track_objective = true;
    smo_train(x, y, SvmOptions{}, &stats);
    REQUIRE(stats.objective_trace.size() > 1);
    for (std::size_t i = 1; i < stats.objective_trace.size(); ++i) {
        CHECK(stats.objective_trace[i] >= stats.objective_trace[i - 1] - 1e-9);
    }
}

TEST_CASE("smo reaches the brute-force dual maximum on tiny instances") {
    Rng rng(53);
    for (int instance = 0; instance < 6; ++instance) {
        const std::size_t n = 4 + rng.below(3);  // 4..6 points
        const FeatureMatrix x = fixtures::random_matrix(rng, n, 5, 0.45);
        auto y = fixtures::random_labels(rng, n, 0.5);
        SvmOptions opts;
        opts.gamma = 0.8;
        opts.tol = 1e-5;  // solver slack well under the comparison budget
        SmoStats stats;
        smo_train(x, y, opts, &stats);
        const double smo_value = svm_dual_objective(x, y, stats.alphas, *opts.gamma);
        const double oracle_value = oracles::svm_dual_bruteforce_max(x, y, opts.c, *opts.gamma);
        CHECK(std::abs(smo_value - oracle_value) < 1e-3);
    }
}

TEST_CASE("xor dual matches the brute-force oracle") {
    const FeatureMatrix x = xor_points();
    SvmOptions opts;  // auto gamma = 1/(2*0.25) = 2
    SmoStats stats;
    smo_train(x, kXorLabels, opts, &stats);
    CHECK(stats.gamma == doctest::Approx(2.0));
    const double smo_value = svm_dual_objective(x, kXorLabels, stats.alphas, stats.gamma);
    const double oracle_value =
        oracles::svm_dual_bruteforce_max(x, kXorLabels, opts.c, stats.gamma, 20);
    CHECK(std::abs(smo_value - oracle_value) < 1e-3);
}

TEST_CASE("single-class input is a training error") {
    Rng rng(54);
    const FeatureMatrix x = fixtures::random_matrix(rng, 5, 3, 0.5);
    CHECK_THROWS_AS(smo_train(x, std::vector<std::uint8_t>(5, 1)), TrainError);
}

TEST_CASE("exhausted budget raises a convergence error with violation counts") {
    Rng rng(55);
    const FeatureMatrix x = fixtures::random_matrix(rng, 40, 10, 0.3);
    const auto y = fixtures::random_labels(rng, 40, 0.5);
    SvmOptions opts;
    opts.max_passes = 0;  // no budget at all
    CHECK_THROWS_WITH_AS(smo_train(x, y, opts), doctest::Contains("violate"), ConvergenceError);
}

TEST_CASE("scores are permutation equivariant") {
    Rng rng(56);
    const FeatureMatrix x = fixtures::random_matrix(rng, 24, 9, 0.35);
    const auto y = fixtures::random_labels(rng, 24, 0.5);
    const SvmModel model = smo_train(x, y);
    const auto direct = svm_score(model, x);
    std::vector<std::size_t> perm(24);
    for (std::size_t i = 0; i < 24; ++i) perm[i] = (i * 5 + 2) % 24;
    const auto permuted = svm_score(model, x.take_rows(perm));
    for (std::size_t i = 0; i < 24; ++i) {
        CHECK(permuted[i] == doctest::Approx(direct[perm[i]]).epsilon(1e-12));
    }
}

}  // TEST_SUITE
