#pragma once

namespace regionflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace regionflow
