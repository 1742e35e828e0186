#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace uqinit {

/// splitmix64 used as a counter-based stream: output i is a pure function of
/// (seed, stream, i), so every synthetic fixture is reproducible from the
/// seed alone. Not for cryptographic use.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(seed ^ mix(stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL)) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (avoids the implementation-defined
  /// std::normal_distribution so streams are stable across toolchains).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline std::vector<double> uniform_vector(SplitMix64& rng, std::size_t n, double a, double b) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(a, b);
  return out;
}

inline std::vector<double> gaussian_vector(SplitMix64& rng, std::size_t n, double mean = 0.0,
                                           double stddev = 1.0) {
  std::vector<double> out(n);
  for (auto& v : out) v = mean + stddev * rng.gaussian();
  return out;
}

}  // namespace uqinit
