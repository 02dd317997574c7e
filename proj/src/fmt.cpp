#include "ews/fmt.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "ews/errors.hpp"

namespace ews {

std::string fmt17(double v) {
  require(std::isfinite(v), "cannot serialize non-finite number");
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  require(n > 0 && n < static_cast<int>(sizeof(buf)), "number formatting failed");
  return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double_token(const char* begin, const char* end, const std::string& what) {
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) throw error(what + ": empty numeric field");
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw error(what + ": malformed number '" + std::string(begin, end) + "'");
  }
  if (!std::isfinite(value)) throw error(what + ": non-finite number");
  return value;
}

}  // namespace ews
