#pragma once

namespace ews {

inline constexpr const char* kToolVersion = "ews 0.1.0";

}  // namespace ews
