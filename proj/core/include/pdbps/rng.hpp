#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pdbps {

/// Purpose tag for deriving independent substreams from one run seed.
enum class StreamKind : std::uint64_t {
  Scenario = 0x5343454e,    // episode-level reward/constraint draws
  Trajectory = 0x54524a43,  // action and transition sampling
  Test = 0x54455354,        // free stream for test harnesses
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Key for the (run, episode, purpose) substream. Episodes and purposes get
/// statistically independent streams, so scenario draws never perturb
/// trajectory draws and runs replay bit-identically.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t episode, StreamKind kind) {
  std::uint64_t k = detail::splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  k = detail::splitmix64(k ^ episode);
  k = detail::splitmix64(k ^ static_cast<std::uint64_t>(kind));
  return k;
}

/// Deterministic random stream. Wraps mt19937_64 but samples through fixed
/// algorithms instead of std distributions, whose output is
/// implementation-defined; output bytes are stable across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : gen_(key) {}
  RngStream(std::uint64_t seed, std::uint64_t episode, StreamKind kind)
      : gen_(stream_key(seed, episode, kind)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Index sampled from an unnormalized nonnegative weight array.
  template <typename Vec>
  std::size_t categorical(const Vec& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Marsaglia-Tsang; shape > 0, unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = std::max(uniform01(), 0x1.0p-64);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double alpha, double b) {
    const double x = gamma(alpha);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pdbps
