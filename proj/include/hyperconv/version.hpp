#pragma once

namespace hyperconv {

inline constexpr const char* kVersion = "hyperconv 0.1.0";

}  // namespace hyperconv
