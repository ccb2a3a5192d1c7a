#pragma once

// Deterministic random sampling.  std::mt19937_64 provides the raw bit
// stream, but all distribution transforms live here because the standard
// library's distribution classes are implementation-defined and would break
// byte-reproducibility across toolchains.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sgid {

// SplitMix64 step, used to derive independent stream seeds from a master
// seed without correlated low bits.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent child stream: master seed and stream index are mixed through
  // SplitMix64 twice so neighboring indices do not share structure.
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t state = master_seed;
    splitmix64(state);
    state ^= 0xD1B54A32D192ED03ull * (stream_index + 1);
    const std::uint64_t derived = splitmix64(state);
    return Rng(derived);
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int needs n > 0");
    // Rejection sampling over a power-of-two envelope keeps the draw exact.
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t mask = ~0ull >> __builtin_clzll(un | 1);
    while (true) {
      const std::uint64_t draw = engine_() & mask;
      if (draw < un) return static_cast<int>(draw);
    }
  }

  // Fisher-Yates shuffle driven by uniform_int, so permutations are exact
  // and reproducible.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Index draw from unnormalized nonnegative weights.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::invalid_argument("categorical needs mass");
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Standard normal via Box-Muller; no caching so the draw count per call is
  // fixed and reproducible.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang; shapes below 1 use the boost
  // Gamma(shape+1) * U^{1/shape}.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma needs shape > 0");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      double u = uniform();
      while (u <= 0.0) u = uniform();
      return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sgid
