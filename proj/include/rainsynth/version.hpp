#pragma once

namespace rainsynth {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace rainsynth
