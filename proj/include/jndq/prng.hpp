#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace jndq {

// SplitMix64 (Steele, Lea, Flood 2014).  Chosen over std::mt19937 because the
// output sequence is fixed by the algorithm, not by the standard library
// implementation, so simulated datasets are reproducible across platforms.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller.  u1 is shifted into (0, 1] so the log
    // argument is never zero.
    double next_normal() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
};

// Independent substream k of a master seed.  Substream k starts from the
// (k+1)-th raw output of SplitMix64(seed), so distinct k never overlap in
// practice and consumers may draw from substreams in any order.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t k) {
    return SplitMix64(SplitMix64::mix(seed + (k + 1) * 0x9E3779B97F4A7C15ULL));
}

}  // namespace jndq
