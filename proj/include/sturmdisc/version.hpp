#pragma once

namespace sturmdisc {

inline constexpr const char* version = "0.1.0";

} // namespace sturmdisc
