#pragma once

#include <complex>
#include <string>
#include <vector>

#include "motional/common.hpp"
#include "motional/rng.hpp"

namespace test_helpers {

// Capture warnings instead of printing them.
inline std::vector<std::string>& warning_log() {
  static std::vector<std::string> log;
  return log;
}

inline void log_warning(const std::string& msg) { warning_log().push_back(msg); }

struct ScopedWarnCapture {
  motional::WarnHandler old;
  ScopedWarnCapture() {
    warning_log().clear();
    old = motional::set_warn_handler(&log_warning);
  }
  ~ScopedWarnCapture() { motional::set_warn_handler(old); }
};

// Deterministic test-point sampling via the library's counter generator.
inline double uniform_in(double lo, double hi, std::uint64_t seed,
                         std::uint64_t idx) {
  return lo + (hi - lo) * motional::rng::uniform(seed, 0xFEED, idx);
}

inline std::complex<double> random_complex(double max_abs, std::uint64_t seed,
                                           std::uint64_t idx) {
  const double r = max_abs * motional::rng::uniform(seed, 1, idx);
  const double ph = 2.0 * motional::kPi * motional::rng::uniform(seed, 2, idx);
  return std::polar(r, ph);
}

// Series exponential, an oracle independent of std::exp.
inline double series_exp(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= x / k;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace test_helpers
