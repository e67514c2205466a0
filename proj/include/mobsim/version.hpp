#pragma once

namespace mobsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mobsim
