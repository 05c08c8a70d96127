#pragma once

#include <cmath>
#include <cstdint>

#include "smlab/common.hpp"

namespace smlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic stream generator. Identical output on every platform, so
/// seeded scenarios reproduce byte for byte. Trials and grid tasks derive
/// independent streams with Rng::derive instead of sharing one sequence.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0xdeadbeefcafef00dull) {
    // decorrelate trivially related seeds
    for (int i = 0; i < 3; ++i) splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return n <= 1 ? 0 : static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Box-Muller (explicit formula; no library distribution,
  /// whose output is implementation-defined).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Complex cgaussian() {
    double re = gaussian();
    double im = gaussian();
    return {re, im};
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    splitmix64(s);
    return splitmix64(s);
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smlab
