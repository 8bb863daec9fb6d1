#pragma once

namespace psymort {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace psymort
