#pragma once

#define FERMIDARK_VERSION "1.0.0"

namespace fermidark {

inline constexpr const char* version() { return FERMIDARK_VERSION; }

}  // namespace fermidark
