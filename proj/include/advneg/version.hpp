#pragma once

namespace advneg {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace advneg
