#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace motifbench {

// splitmix64. Every seeded kernel and generator draws from this so that the
// output stream for a given seed is identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Marsaglia polar method. Uses only IEEE-exact operations and
  // portable_log, so the variates do not depend on the platform's libm.
  double gaussian(double mu, double sigma) {
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mu + sigma * u * std::sqrt(-2.0 * portable_log(s) / s);
  }

  // Natural log of a positive finite x from +, -, *, / and frexp only.
  static double portable_log(double x) {
    int e = 0;
    double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
    if (m < std::numbers::sqrt2 / 2) {
      m *= 2.0;
      --e;
    }
    // log(m) = 2 atanh(t), t = (m - 1) / (m + 1), |t| < 0.172
    const double t = (m - 1.0) / (m + 1.0);
    const double t2 = t * t;
    double series = 0.0;
    for (int k = 25; k >= 1; k -= 2) series = series * t2 + 1.0 / k;
    constexpr double ln2_hi = 0x1.62e42fefa3800p-1;
    constexpr double ln2_lo = 0x1.ef35793c76730p-45;
    return static_cast<double>(e) * ln2_hi + (2.0 * t * series + static_cast<double>(e) * ln2_lo);
  }

 private:
  std::uint64_t state_;
};

}  // namespace motifbench
