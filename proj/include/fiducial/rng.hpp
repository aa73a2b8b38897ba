#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Deterministic, counter-based random streams.
//
// Every chain owns an independent stream identified by (master_seed, chain
// index). The mapping is fixed and documented in the README so that output
// files are reproducible across machines and worker counts:
//
//   chain key k0 = mix64(master_seed + (chain + 1) * 0x9E3779B97F4A7C15)
//   chain key k1 = master_seed
//   raw u64 draw i of the stream = lane (i mod 4) of
//       philox4x64_10(counter = i / 4, key = (k0, k1))
//
// Variate recipes (consumption order matters and is part of the contract):
//   uniform(0,1):   u = ((raw >> 11) + 0.5) * 2^-53
//   exponential(1): -log(u)                          (one uniform)
//   normal(0,1):    Box-Muller pair from (u1, u2):
//                   r = sqrt(-2 log u1), theta = 2*pi*u2,
//                   first value r*cos(theta), second r*sin(theta)
//   gamma(a,1):     Marsaglia-Tsang for a >= 1 (one normal + one uniform per
//                   trial, rejections consume the stream); for a < 1 draw
//                   gamma(a+1) and multiply by u^(1/a).
namespace fiducial {

// splitmix64 finalizer (Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t chain_key(std::uint64_t master_seed, std::uint64_t chain_index) {
    return mix64(master_seed + (chain_index + 1) * kGolden64);
}

namespace detail {
struct U64Product {
    std::uint64_t hi;
    std::uint64_t lo;
};

inline U64Product mulhilo64(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    return {static_cast<std::uint64_t>(p >> 64), static_cast<std::uint64_t>(p)};
}
}  // namespace detail

// Philox4x64 with 10 rounds (Random123 constants). Pure function of
// (counter, key); forms the basis of all chain streams.
inline std::array<std::uint64_t, 4> philox4x64_block(std::array<std::uint64_t, 4> ctr,
                                                     std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;
    for (int round = 0; round < 10; ++round) {
        if (round != 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const auto p0 = detail::mulhilo64(kMul0, ctr[0]);
        const auto p1 = detail::mulhilo64(kMul1, ctr[2]);
        ctr = {p1.hi ^ ctr[1] ^ key[0], p1.lo, p0.hi ^ ctr[3] ^ key[1], p0.lo};
    }
    return ctr;
}

class ChainStream {
public:
    ChainStream(std::uint64_t master_seed, std::uint64_t chain_index)
        : key_{chain_key(master_seed, chain_index), master_seed} {}

    std::uint64_t next_u64() {
        if (buf_pos_ == 4) {
            buf_ = philox4x64_block(ctr_, key_);
            if (++ctr_[0] == 0) ++ctr_[1];  // 128-bit counter is ample
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    // Strictly inside (0,1); safe to feed to log().
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform01()); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double gamma(double shape) {
        if (shape < 1.0) {
            const double boost = std::pow(uniform01(), 1.0 / shape);
            return gamma(shape + 1.0) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> buf_{};
    int buf_pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace fiducial
