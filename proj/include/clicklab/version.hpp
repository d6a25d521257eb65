#pragma once

namespace clicklab {

inline constexpr const char* toolkit_name = "clicklab";
inline constexpr const char* toolkit_version = "1.0.0";

}
