#pragma once

#include <cstdio>
#include <string>

namespace mfgh {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return std::string(buf);
}

}  // namespace mfgh
