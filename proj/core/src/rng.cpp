#include "abel/rng.hpp"

#include <cmath>

namespace abel {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void Philox::refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = stream_lo_;
    std::uint32_t c3 = stream_hi_;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;

    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c0, hi0, lo0);
        mulhilo(kPhiloxM1, c2, hi1, lo1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }

    out_[0] = c0;
    out_[1] = c1;
    out_[2] = c2;
    out_[3] = c3;
    ++counter_;
    cursor_ = 0;
}

std::uint32_t Philox::next_u32() {
    if (cursor_ >= 4) refill();
    return out_[cursor_++];
}

std::uint64_t Philox::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Philox::uniform() {
    // 53-bit mantissa mapped to (0, 1].
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double Philox::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

} // namespace abel
