#pragma once

#include <cmath>
#include <cstdint>

namespace decsim {

// Counter-based generator: every draw is a stateless hash of
// (seed, worker, stream, counter). Replays are independent of event
// interleaving, which keeps simulations reproducible bit-for-bit.
namespace rng_detail {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

inline uint64_t hash4(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  uint64_t z = mix64(a + 0x9e3779b97f4a7c15ULL);
  z = mix64(z ^ (b + 0xbf58476d1ce4e5b9ULL));
  z = mix64(z ^ (c + 0x94d049bb133111ebULL));
  z = mix64(z ^ (d + 0xd6e8feb86659fd93ULL));
  return z;
}

}  // namespace rng_detail

// Stream purposes; part of the RNG key so that streams never collide.
enum class RngPurpose : uint64_t {
  kOracle = 1,
  kJitter = 2,
  kLevelGame = 3,
  kProblemGen = 4,
  kTest = 5,
};

class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t worker, RngPurpose purpose)
      : seed_(seed), worker_(worker), purpose_(static_cast<uint64_t>(purpose)) {}

  uint64_t next_u64() {
    return rng_detail::hash4(seed_, worker_, purpose_, counter_++);
  }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (static_cast<double>(next_u64() >> 11) * 0x1.0p-53) * (hi - lo);
  }

  bool bernoulli(double p) { return uniform_open() < p; }

  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Geometric on {1, 2, ...} via inverse CDF; p = 1 short-circuits to 1.
  uint64_t geometric(double p) {
    if (p >= 1.0) return 1;
    const double u = uniform_open();
    const double g = std::ceil(std::log(u) / std::log1p(-p));
    if (g < 1.0) return 1;
    if (g > 9e18) return 9000000000000000000ULL;
    return static_cast<uint64_t>(g);
  }

  uint64_t counter() const { return counter_; }
  void set_counter(uint64_t c) { counter_ = c; }

 private:
  uint64_t seed_;
  uint64_t worker_;
  uint64_t purpose_;
  uint64_t counter_ = 0;
};

}  // namespace decsim
