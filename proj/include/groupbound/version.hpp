#pragma once

namespace groupbound {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace groupbound
