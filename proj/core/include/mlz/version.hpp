#pragma once

namespace mlz {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mlz
