#pragma once

#include <stdexcept>
#include <string>

namespace ews {

// Computational or data failure (bad numeric state, malformed file, size
// guard). The CLI maps this to exit code 1.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Misuse of the command-line surface; maps to exit code 2.
class usage_error : public error {
 public:
  explicit usage_error(const std::string& what) : error(what) {}
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw error(what);
}

// Literal-message overload: no std::string is constructed when the check
// passes, which matters for checks sitting inside per-segment loops.
inline void require(bool ok, const char* what) {
  if (!ok) throw error(what);
}

}  // namespace ews
