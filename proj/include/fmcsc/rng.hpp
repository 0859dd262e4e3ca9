#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fmcsc {

// Deterministic splittable RNG (splitmix64 core). A master seed fans out into
// named substreams so adding clients or purposes does not perturb unrelated
// streams. All distribution transforms are written out explicitly to keep
// results identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  // Child stream derived from this stream's seed and a label.
  Rng stream(std::string_view name) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return Rng(Raw{}, mix(state_ ^ h));
  }

  Rng stream(std::uint64_t index) const {
    return Rng(Raw{}, mix(state_ ^ (0x9e3779b97f4a7c15ull * (index + 1))));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0,n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (no cached spare, for reproducibility of
  // interleaved streams).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Laplace(0, scale) via inverse CDF.
  double laplace(double scale) {
    double u = uniform() - 0.5;
    return -scale * std::copysign(std::log(1.0 - 2.0 * std::fabs(u)), -u);
  }

  // Marsaglia-Tsang gamma sampler, shape alpha > 0, unit scale.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::vector<double> dirichlet(std::size_t n, double alpha) {
    std::vector<double> out(n);
    double sum = 0.0;
    for (auto& x : out) {
      x = gamma(alpha);
      sum += x;
    }
    if (sum <= 0.0) sum = 1.0;
    for (auto& x : out) x /= sum;
    return out;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  struct Raw {};
  Rng(Raw, std::uint64_t s) : state_(s) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace fmcsc
