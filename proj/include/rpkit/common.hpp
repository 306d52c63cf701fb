#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rpkit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestionError : Error {
    using Error::Error;
};
struct EmptyPanelError : Error {
    using Error::Error;
};
struct IncompletePriceError : Error {
    using Error::Error;
};
struct UnpriceableItemError : Error {
    using Error::Error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct RankDeficiencyError : Error {
    using Error::Error;
};
struct InsufficientDataError : Error {
    using Error::Error;
};

// 64-bit mixing (splitmix64 finalizer). Used to derive independent RNG
// streams from (seed, household, draw) so parallel and serial runs agree.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t stream_seed(std::uint64_t seed, const std::string& key, std::uint64_t index) {
    return mix64(mix64(seed ^ fnv1a(key)) + index);
}

// Cheap counter-based generator (splitmix64): much faster to seed and step
// than mt19937_64, which matters in the per-draw imputation loop.
struct SplitMix64 {
    using result_type = std::uint64_t;
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t operator()() { return mix64(state++); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }
};

// Unbiased-enough bounded draw from a 64-bit generator output
// (fixed-point multiply; deterministic across platforms, unlike
// std::uniform_int_distribution).
template <class Rng>
std::uint64_t bounded(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

template <class Rng>
double unit_uniform(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rpkit
