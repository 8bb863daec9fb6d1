#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace psymort {

/// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
/// <random> engines so that shuffles and draws are bit-identical across
/// platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t bound) {
        if (bound < 2) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    bool bernoulli(double p) { return next_double() < p; }

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Derives the seed of a named sub-stream from a master seed. Every source of
/// randomness in the pipeline draws from its own named stream so that adding
/// parallelism or reordering work never changes results.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t a, std::uint64_t b = 0);

}  // namespace psymort
