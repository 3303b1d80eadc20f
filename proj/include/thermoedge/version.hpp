#pragma once

namespace thermoedge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace thermoedge
