#pragma once

#include <cstdint>

namespace abel {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3").
//
// Substream derivation: the 64-bit seed forms the key and the 64-bit
// `stream` id occupies the high counter words, so (seed, stream) pairs
// index statistically independent sequences. The coverage harness assigns
// one stream per Monte Carlo replication and reserves disjoint stream
// ranges for bootstrap draws; see simulate.cpp.
// splitmix64 finalizer; derives well-separated child seeds from
// (seed, salt) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on (0, 1] (safe under log).
    double uniform();

    // Standard normal via Box-Muller on the uniform stream.
    double normal();

    // Positions the generator at an arbitrary 128-bit counter block
    // (jump-ahead; also used by the known-answer tests).
    void set_counter(std::uint64_t block) {
        counter_ = block;
        cursor_ = 4;
        has_cached_normal_ = false;
    }

private:
    void refill();

    std::uint32_t key0_, key1_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t counter_ = 0;
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int cursor_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace abel
