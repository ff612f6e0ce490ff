#pragma once

#include <cstdio>
#include <string>

namespace quasispec {

/// 17 significant digits: parses back to the identical double.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace quasispec
