#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace linkpred {

// Seed derivation for substreams (per tree, per repetition, per page).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic generator with hand-rolled samplers, so that identical
// seeds give identical streams on every platform (std:: distributions are
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x4d595df4d0f33173ULL) {
    // warm up: xorshift-style states need a few rounds to decorrelate
    for (int i = 0; i < 4; ++i) next_u64();
  }

  std::uint64_t next_u64() {
    // splitmix64 step
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0. Rejection keeps the draw unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller (no caching: stream position stays
  // a simple function of the number of calls).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  // Poisson by inversion for small means; larger means are split using
  // Poisson(a+b) = Poisson(a) + Poisson(b).
  std::uint64_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    std::uint64_t total = 0;
    while (lambda > 16.0) {
      total += poisson_small(16.0);
      lambda -= 16.0;
    }
    return total + poisson_small(lambda);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

  // Random permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    shuffle(p);
    return p;
  }

 private:
  std::uint64_t poisson_small(double lambda) {
    const double limit = std::exp(-lambda);
    double prod = uniform();
    std::uint64_t k = 0;
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  std::uint64_t state_;
};

}  // namespace linkpred
