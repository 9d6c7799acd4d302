#pragma once

namespace metriscope {

inline constexpr const char* kVersion = "0.1.0";

} // namespace metriscope
