#pragma once

namespace tcsim
{

inline constexpr const char* version = "0.1.0";

}  // namespace tcsim
