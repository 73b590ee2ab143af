#pragma once

namespace nashseek {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nashseek
