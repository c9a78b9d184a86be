#pragma once

#include <cstdint>
#include <random>

namespace holo {

// Deterministic uniform generator used everywhere randomness is needed.
// The 53-bit mapping keeps sequences identical across platforms, unlike
// std::uniform_real_distribution.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace holo
