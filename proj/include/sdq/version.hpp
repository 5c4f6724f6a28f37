#pragma once

namespace sdq {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sdq
