#ifndef SELFORG_RNG_HPP
#define SELFORG_RNG_HPP

#include <cstdint>

namespace selforg {

// Portable counter-based generator (SplitMix64, Steele et al. 2014).
// Chosen over std::mt19937 because the stream is fixed by the algorithm
// alone: the same seed yields the same draws on every platform/compiler,
// which the reproducibility contract requires.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [-1, 1)
    double next_symmetric() { return 2.0 * next_double() - 1.0; }

private:
    std::uint64_t state_;
};

// SplitMix64 finalizer used as an avalanching hash.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Seed of realization i in an ensemble with the given base seed. Stable
// across platforms and independent of execution order: documented as
// mix64(base_seed XOR mix64(i + 1)).
inline std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t i) {
    return mix64(base_seed ^ mix64(i + 1));
}

} // namespace selforg

#endif
