#pragma once

// Seedable, portable randomness for dataset generation. The engine is
// splitmix64; substreams are derived by mixing the dataset seed with a
// stream key, so every sample draws from its own independent stream and
// generation order never affects the values.

#include <cstdint>

#include "mdnre/common.hpp"

namespace mdnre {

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; one value per call, pair cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Substream for (seed, key): one extra splitmix scramble decorrelates
// neighbouring keys before they seed the engine.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t key) {
    SplitMix64 mixer(seed ^ (key * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    return SplitMix64(mixer.next_u64());
}

}  // namespace mdnre
