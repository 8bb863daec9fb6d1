#include <benchmark/benchmark.h>

#include "psymort/cohort.hpp"
#include "psymort/eval.hpp"
#include "psymort/features.hpp"
#include "psymort/models.hpp"
#include "psymort/rng.hpp"
#include "psymort/synth.hpp"

using namespace psymort;

namespace {

FeatureMatrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                            double density) {
    Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    FeatureMatrix m(std::move(names), rows);
    for (std::size_t r = 0; r < rows; ++r) {
        m.row_ids.push_back(static_cast<std::int64_t>(r));
        for (std::size_t c = 0; c < cols; ++c) {
            if (rng.bernoulli(density)) m.set(r, c);
        }
    }
    return m;
}

std::vector<std::uint8_t> random_labels(std::uint64_t seed, std::size_t n, double p) {
    Rng rng(seed);
    std::vector<std::uint8_t> y(n);
    for (auto& v : y) v = rng.bernoulli(p) ? 1 : 0;
    y[0] = 1;
    y[n - 1] = 0;
    return y;
}

void BM_Generate(benchmark::State& state) {
    SynthConfig cfg = SynthConfig::signal_preset(1);
    cfg.n_patients = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate(cfg));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Generate)->Arg(500)->Arg(2000)->Arg(8000)->Complexity();

void BM_Transform(benchmark::State& state) {
    SynthConfig cfg = SynthConfig::signal_preset(2);
    cfg.n_patients = state.range(0);
    const auto cohort = build_cohort(generate(cfg));
    const FeatureSpace space = fit_feature_space(cohort);
    for (auto _ : state) {
        benchmark::DoNotOptimize(transform(space, cohort));
    }
}
BENCHMARK(BM_Transform)->Arg(2000);

void BM_SmoTrain(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const FeatureMatrix x = random_matrix(3, n, 120, 0.12);
    const auto y = random_labels(4, n, 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(smo_train(x, y));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmoTrain)->Arg(128)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond)->Complexity();

void BM_RfTrain(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const FeatureMatrix x = random_matrix(5, n, 120, 0.12);
    const auto y = random_labels(6, n, 0.3);
    RfOptions opts;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rf_train(x, y, opts, 7));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RfTrain)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond)->Complexity();

void BM_KnnScore(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const FeatureMatrix train = random_matrix(8, n, 120, 0.12);
    const FeatureMatrix queries = random_matrix(9, 256, 120, 0.12);
    const auto y = random_labels(10, n, 0.3);
    const KnnModel model = knn_train(train, y);
    for (auto _ : state) {
        benchmark::DoNotOptimize(knn_score(model, queries));
    }
}
BENCHMARK(BM_KnnScore)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(11);
    std::vector<double> scores(n);
    for (auto& s : scores) s = rng.next_double();
    const auto y = random_labels(12, n, 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(auc(roc_curve(scores, y)));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(10000)->Arg(100000)->Complexity();

}  // namespace

BENCHMARK_MAIN();
