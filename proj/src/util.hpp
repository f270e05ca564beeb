#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace twdglm {

// glibc's lgamma writes the global signgam; the reentrant form does not.
inline double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

// Shortest text that round-trips the double.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace twdglm
