#pragma once

#include <cmath>
#include <cstdint>

namespace volpath {

/// Philox4x32-10 counter-based generator. Streams are cheap: any (seed,
/// stream) pair yields an independent sequence, which is what lets per-day
/// simulation and per-replication bootstraps run on any number of threads
/// with identical output.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (idx_ == 4) {
      block();
      idx_ = 0;
    }
    return out_[idx_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for n << 2^64 and, more to the
    // point, deterministic.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Poisson count by inversion of exponential waiting times; fine for the
  /// small per-interval means used here.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  void block() {
    std::uint32_t c0 = ctr0_, c1 = ctr1_, c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * c0;
      std::uint64_t p1 = 0xCD9E8D57ull * c2;
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
    if (++ctr0_ == 0) ++ctr1_;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0, ctr2_, ctr3_;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int idx_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace volpath
