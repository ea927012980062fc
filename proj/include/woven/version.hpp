#pragma once

namespace woven {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace woven
