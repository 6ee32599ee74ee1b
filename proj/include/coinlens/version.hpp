#pragma once

namespace coinlens {

inline constexpr const char* kVersion = "0.1.0";

} // namespace coinlens
