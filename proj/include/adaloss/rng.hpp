#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace adaloss {

/// SplitMix64 finaliser (Steele, Lea, Flood 2014).
std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// xoshiro256** 1.0 (Blackman and Vigna), seeded by running SplitMix64 from
/// the 64-bit seed. Every derived quantity (uniform reals, bounded integers,
/// normals) is defined here rather than through <random> distributions, whose
/// output is implementation-defined, so datasets reproduce bit-exactly across
/// standard libraries and language ports.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Independent stream for (seed, id_0, id_1, ...):
    /// h = mix(seed); for each id: h = mix(h ^ mix(id + 0x9E3779B97F4A7C15)).
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) noexcept;
    static std::uint64_t derive_seed(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> ids) noexcept;

    std::uint64_t next_u64() noexcept;

    /// (next >> 11) * 2^-53, in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound) by rejection of the biased top range.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept;

    /// Standard normal via Box-Muller (cosine branch only; two draws per call).
    double normal() noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
};

} // namespace adaloss
