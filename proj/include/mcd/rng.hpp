#pragma once

#include <cstdint>
#include <vector>

#include "mcd/types.hpp"

namespace mcd {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that identical seeds
// give identical draws on every platform; std:: distributions are
// implementation-defined and would break byte-identical reruns.
class Rng {
 public:
  Rng() : Rng(0, 0, 0) {}
  Rng(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t instance) {
    std::uint64_t x = master_seed ^ (purpose * 0x9e3779b97f4a7c15ull) ^
                      (instance * 0xbf58476d1ce4e5b9ull);
    for (auto& word : s_) word = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, bound). Lemire rejection; unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw SimError("Rng::below(0)");
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (lo < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform in [lo, hi] inclusive.
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw SimError("Rng::range: lo > hi");
    return lo + below(hi - lo + 1);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t s_[4];
};

// Stream purposes; a (seed, purpose, instance) triple names one independent stream.
enum class RngPurpose : std::uint64_t {
  Updates = 1,   // instance = channel
  Workload = 2,  // instance = client
  Arrivals = 3,  // instance = client
};

inline Rng make_stream(std::uint64_t seed, RngPurpose purpose, std::uint64_t instance) {
  return Rng(seed, static_cast<std::uint64_t>(purpose), instance);
}

// Zipf sampler over ranks 0..n-1, P(k) proportional to 1/(k+1)^theta.
// theta = 0 degrades to uniform.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double theta);
  std::uint64_t sample(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace mcd
