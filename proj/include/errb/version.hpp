#pragma once

namespace errb {

inline constexpr const char* kVersion = "0.1.0";

} // namespace errb
