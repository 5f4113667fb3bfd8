#pragma once

namespace pbitsim {
inline constexpr const char* kVersion = "0.1.0";
}
