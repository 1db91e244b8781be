#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace faacaf {

// splitmix64; stable across platforms so cubes are bit-identical everywhere.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed ^ 0x5851f42d4c957f2dULL;
  s ^= splitmix64(a);
  s += splitmix64(b) * 0x2545f4914f6cdd1dULL;
  return s;
}

/// Deterministic per-stream generator. Streams derived from (seed, m, q) are
/// independent, so parallel and serial synthesis give identical output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so nearby seeds decorrelate
    splitmix64(state_);
    splitmix64(state_);
  }

  static Rng stream(std::uint64_t seed, std::uint64_t m, std::uint64_t q) {
    return Rng(mix_seed(seed, m, q));
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly symmetric complex normal with unit variance.
  std::complex<double> complex_gaussian() {
    const double s = std::sqrt(0.5);
    return {s * gaussian(), s * gaussian()};
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace faacaf
