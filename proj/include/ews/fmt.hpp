#pragma once

#include <string>

namespace ews {

// Shortest-faithful decimal form used for every number we write (CSV, JSON):
// 17 significant digits round-trip any double exactly.
std::string fmt17(double v);

// Strict double parse of a full token (std::from_chars; no trailing junk,
// no empty field). `what` names the location for the error message.
double parse_double_token(const char* begin, const char* end, const std::string& what);

}  // namespace ews
