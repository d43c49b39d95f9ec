#pragma once

namespace linkfp {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace linkfp
