#pragma once

#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace motional {

using cxd = std::complex<double>;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = 3.14159265358979323846;

// Raised when an iterative or truncated computation leaves its validity
// envelope (norm drift, non-physical projection input, ...). Precondition
// violations use the standard logic_error family instead.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarnHandler = void (*)(const std::string&);

namespace detail {
inline void default_warn(const std::string& msg) {
  std::fprintf(stderr, "motional: warning: %s\n", msg.c_str());
}
inline WarnHandler& warn_handler() {
  static WarnHandler h = &default_warn;
  return h;
}
inline void warn(const std::string& msg) { warn_handler()(msg); }
}  // namespace detail

// Swap out the sink for truncation/regime warnings (tests use a silent one).
inline WarnHandler set_warn_handler(WarnHandler h) {
  WarnHandler old = detail::warn_handler();
  detail::warn_handler() = h;
  return old;
}

}  // namespace motional
