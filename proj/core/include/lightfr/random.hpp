#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lightfr {

/// splitmix64 finalizer; used to derive independent streams from one master seed.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream seed for (master, tags...). Order of tags matters.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = mix64(master);
    for (auto t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
    return h;
}

// Stream tags, so that e.g. user 3 and round 3 never share a stream.
inline constexpr std::uint64_t kTagItems = 0x49544d53;
inline constexpr std::uint64_t kTagUsers = 0x55535253;
inline constexpr std::uint64_t kTagRound = 0x524e4453;
inline constexpr std::uint64_t kTagNegatives = 0x4e454753;
inline constexpr std::uint64_t kTagFactors = 0x46414354;
inline constexpr std::uint64_t kTagShuffle = 0x53485546;

/// Seeded generator with distribution helpers that do not depend on the
/// standard library's (implementation-defined) distribution algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        // Rejection keeps the result exactly uniform.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace lightfr
