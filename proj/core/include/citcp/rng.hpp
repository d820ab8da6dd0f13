#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace citcp {

// Deterministic random source. mt19937_64 output is fixed by the standard,
// but std::*_distribution is not, so the transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1): 53-bit mantissa.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0; slight modulo bias is
  // acceptable for n far below 2^64.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

  // Standard normal via Box-Muller. One value per call; no caching so the
  // stream position is easy to reason about.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Exponential with the given mean (inverse CDF).
  double exponential(double mean) {
    double u = uniform();
    while (u >= 1.0) u = uniform();
    return -mean * std::log1p(-u);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream; mixes the parent seed with a salt so
  // per-component streams never overlap by construction order.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  // Stable 64-bit hash of a string, for salting streams by name.
  static std::uint64_t hash_name(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace citcp
