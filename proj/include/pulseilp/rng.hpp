#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pulseilp {

// All randomness in the library flows through this header so that results are
// reproducible across platforms and standard-library versions. mt19937_64 is
// specified exactly by the standard, but the std::uniform_* distributions are
// not (their output is implementation-defined), so we hand-roll the two draws
// we need on top of the raw engine.

namespace detail {

// SplitMix64 finalizer. Used both to mix seed words and as the engine behind
// derive_seed; its output is well-distributed even for sequential inputs.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Derives a child seed from a base seed and a list of index words (cell
// coordinates, trial numbers, stream tags...). Pure function: the same words
// always give the same child, and distinct word lists give distinct children
// with overwhelming probability. Experiments rely on this to make any single
// trial reproducible in isolation.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    std::uint64_t z = detail::splitmix64(base);
    for (std::uint64_t w : words) {
        z = detail::splitmix64(z ^ detail::splitmix64(w));
    }
    return z;
}

// Deterministic uniform generator. Wraps mt19937_64 and exposes only
// platform-stable draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] by rejection; unbiased and portable.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) {  // full 64-bit range
            return static_cast<std::int64_t>(eng_());
        }
        const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % span);
        std::uint64_t z;
        do {
            z = eng_();
        } while (z >= limit);
        return lo + static_cast<std::int64_t>(z % span);
    }

    // Uniform draw of a single bit.
    bool coin() { return (eng_() >> 63) != 0; }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace pulseilp
