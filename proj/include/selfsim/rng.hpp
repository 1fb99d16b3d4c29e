#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC'11).  Every
// normal variate is a pure function of (seed, stream, index), which makes the
// Monte Carlo backends reproducible independently of worker count.

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace selfsim::rng {

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace detail

// One 128-bit Philox4x32-10 block keyed by a 64-bit seed; the counter is the
// pair (stream, index).
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream,
                                               std::uint64_t index) {
    using namespace detail;
    std::uint32_t c[4] = {static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM4x32A, c[0], lo0, hi0);
        mulhilo(kPhiloxM4x32B, c[2], lo1, hi1);
        const std::uint32_t n0 = hi1 ^ c[1] ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c[3] ^ k1;
        const std::uint32_t n3 = lo0;
        c[0] = n0;
        c[1] = n1;
        c[2] = n2;
        c[3] = n3;
        k0 += kPhiloxW32A;
        k1 += kPhiloxW32B;
    }
    return {c[0], c[1], c[2], c[3]};
}

inline double to_unit_interval(std::uint64_t bits) {
    // (0,1): top 53 bits plus half an ulp keeps the value away from 0
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Two independent N(0,1) values for the counter (stream, index).
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                             std::uint64_t index) {
    const auto r = philox4x32(seed, stream, index);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = to_unit_interval(a);
    const double u2 = to_unit_interval(b);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::acos(-1.0) * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const auto p = normal_pair(seed, stream, index / 2);
    return (index % 2 == 0) ? p.first : p.second;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const auto r = philox4x32(seed, stream, index);
    return to_unit_interval((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
}

// Convenience sequential stream view over the counter-based generator.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
    double next_uniform() { return uniform(seed_, stream_, index_++); }
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto p = normal_pair(seed_, stream_, index_++);
        spare_ = p.second;
        have_spare_ = true;
        return p.first;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace selfsim::rng
