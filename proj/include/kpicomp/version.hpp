#pragma once

namespace kpicomp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kpicomp
