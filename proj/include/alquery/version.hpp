#pragma once

namespace alquery {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace alquery
