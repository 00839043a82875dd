#pragma once

namespace rotkit {

inline constexpr const char* kVersion = "rotkit 0.1.0";

} // namespace rotkit
