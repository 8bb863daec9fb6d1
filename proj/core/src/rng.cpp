#include "psymort/rng.hpp"

namespace psymort {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view text) {
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xff;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t mix(std::uint64_t h) {
    // One splitmix64 round so nearby hashes land far apart as seeds.
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
    return mix(fnv1a(fnv1a(kFnvOffset, master), stream));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t a,
                          std::uint64_t b) {
    return mix(fnv1a(fnv1a(fnv1a(fnv1a(kFnvOffset, master), stream), a), b));
}

}  // namespace psymort
