#pragma once

namespace ordino {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ordino
