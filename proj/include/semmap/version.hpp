#pragma once

namespace semmap {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace semmap
