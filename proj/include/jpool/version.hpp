#pragma once

namespace jpool {

inline constexpr const char* kVersion = "0.1.0";

// Bumped when any on-disk JSON layout changes shape.
inline constexpr int kFormatVersion = 1;

}  // namespace jpool
