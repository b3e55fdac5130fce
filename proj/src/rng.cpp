#include "vbsynth/rng.hpp"

#include <limits>

namespace vbsynth {

std::uint64_t Rng::uniform_int(std::uint64_t n)
{
    if (n <= 1) {
        return 0;
    }
    // Largest multiple of n that fits; draws above it are rejected.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) {
        v = engine_();
    }
    return v % n;
}

} // namespace vbsynth
