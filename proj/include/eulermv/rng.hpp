#pragma once

// Seed derivation and Gaussian draws. All randomness in the project flows
// through these helpers so that a (seed, purpose) pair fully determines the
// stream, independent of library internals.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace eulermv::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic sub-seed from a base seed and a list of context words
// (path index, macro step, subdivision level, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    std::uint64_t s = base;
    (void)splitmix64(s);
    for (std::uint64_t w : words) {
        s ^= w + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2);
        (void)splitmix64(s);
    }
    return splitmix64(s);
}

// Standard normal draws via explicit Box-Muller on top of mt19937_64, so the
// sequence is fixed by the seed alone (no reliance on the library's
// distribution internals).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();       // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace eulermv::rng
