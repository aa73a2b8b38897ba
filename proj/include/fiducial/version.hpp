#pragma once

namespace fiducial {
inline constexpr const char* kVersion = "0.1.0";
}
