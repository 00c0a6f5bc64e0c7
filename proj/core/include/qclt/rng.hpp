// rng.hpp — deterministic Gaussian sampling (fixed algorithm, not the
// implementation-defined std::normal_distribution)
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qclt {

// Box–Muller over mt19937_64.  Identical output on every platform for a
// given seed, which the reproducibility contract relies on.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    cached_ = rad * std::sin(ang);
    have_ = true;
    return rad * std::cos(ang);
  }

 private:
  double uniform01() {
    // 53-bit mantissa in [0,1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 eng_;
  bool have_ = false;
  double cached_ = 0.0;
};

}  // namespace qclt
