#pragma once

// Deterministic, platform-independent random streams.
//
// Every replication r of a run with master seed s draws from its own counter
// stream keyed by
//     seed_r = mix64(s XOR (r * 0x9E3779B97F4A7C15)),
// where mix64 is the 3-round xor-shift-multiply finalizer below. The t-th
// variate of the stream is mix64(seed_r + (t+1) * 0x9E3779B97F4A7C15), mapped
// to [0,1) by taking the top 53 bits. Identical (seed, r) yields identical
// draws on every platform; no library generator is involved.

#include <cstdint>

namespace invlab {

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

/// 3-round xor-shift-multiply finalizer (shifts 30/27/31).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct StreamSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t replication = 0;

    [[nodiscard]] std::uint64_t seed() const {
        return mix64(master_seed ^ (replication * kGolden64));
    }
};

/// Per-horizon master-seed derivation for sweeps.
inline std::uint64_t horizon_seed(std::uint64_t master_seed, int horizon) {
    return mix64(master_seed ^ static_cast<std::uint64_t>(horizon));
}

class CounterRng {
  public:
    explicit CounterRng(StreamSpec spec) : seed_(spec.seed()) {}
    explicit CounterRng(std::uint64_t raw_seed) : seed_(raw_seed) {}

    std::uint64_t next_u64() { return mix64(seed_ + (++counter_) * kGolden64); }

    /// Uniform variate in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace invlab
