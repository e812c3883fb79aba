#pragma once

/// Fixed-precision text output shared by all writers.

#include <cstdio>
#include <string>

namespace diracloc {

/// 17 significant digits, enough to round-trip any double.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace diracloc
