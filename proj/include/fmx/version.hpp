#pragma once

namespace fmx {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fmx
