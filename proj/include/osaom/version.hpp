#pragma once

namespace osaom {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace osaom
