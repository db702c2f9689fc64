#pragma once

namespace tradewinds {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tradewinds
