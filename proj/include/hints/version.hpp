#pragma once

namespace hints {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hints
