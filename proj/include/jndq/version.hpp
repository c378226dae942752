#pragma once

namespace jndq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace jndq
