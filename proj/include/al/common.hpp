#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace al {

using cplx = std::complex<double>;

inline constexpr const char* tool_name = "al-lab";
inline constexpr const char* tool_version = "0.1.0";

// Bad inputs: windows, exponents, flow specs, config files.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runtime numerical trouble: blowups, singular operators, failed solves.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic RNG. mt19937_64 is bit-exact across standard libraries; the
// distribution mapping below avoids std::uniform_real_distribution, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Complex value with |z| <= r (rejection-free box sample scaled to the disk).
  cplx disk(double r) {
    for (;;) {
      double x = uniform(-1.0, 1.0), y = uniform(-1.0, 1.0);
      if (x * x + y * y <= 1.0) return cplx(r * x, r * y);
    }
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Shortest deterministic decimal form that round-trips a double.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace al
