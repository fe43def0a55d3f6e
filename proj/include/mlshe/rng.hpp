#pragma once

#include <cmath>
#include <cstdint>

namespace mlshe::rng {

// Counter-based generator: every draw is a pure function of (seed, counter),
// so ensembles can be filled in any order, or in parallel, without changing
// a single bit of the output.

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed) ^ splitmix64(counter * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL));
}

// Uniform on (0,1), never returns 0 or 1.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return (static_cast<double>(mix(seed, counter) >> 11) + 0.5) * 0x1p-53;
}

// One standard normal per counter (Box-Muller, cosine branch).
inline double normal(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = uniform01(seed, 2 * counter);
    const double u2 = uniform01(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Independent sub-seed for ensemble member `index`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix(seed, index ^ 0xd1b54a32d192ed03ULL);
}

// Small stateful wrapper for sequential sampling code (bridges, matrices).
// Still counter-based underneath, so copies and replays are exact.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : seed_(seed) {}

    double normal() { return mlshe::rng::normal(seed_, counter_++); }
    double uniform() { return mlshe::rng::uniform01(seed_, counter_++ + (1ULL << 62)); }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace mlshe::rng
