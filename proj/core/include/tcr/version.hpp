#pragma once

namespace tcr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tcr
