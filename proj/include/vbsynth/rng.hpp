#pragma once

#include <cstdint>
#include <random>

namespace vbsynth {

/// Seedable random stream used by every stochastic operation.
///
/// Backed by MT19937-64, whose raw output sequence is fixed by the C++
/// standard. The conversions to doubles and bounded integers are done here
/// rather than through <random> distributions, whose algorithms vary
/// between standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform on {0, ..., n-1}; n must be positive. Unbiased (rejection).
    std::uint64_t uniform_int(std::uint64_t n);

    /// -1 or +1 with equal probability.
    int sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace vbsynth
