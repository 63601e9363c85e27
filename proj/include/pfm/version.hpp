#pragma once

namespace pfm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pfm
