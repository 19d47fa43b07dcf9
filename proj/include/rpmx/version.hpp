#pragma once

namespace rpmx {

inline constexpr const char* kVersion = "0.2.0";

}  // namespace rpmx
