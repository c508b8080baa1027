#pragma once

namespace wavespec {

// Bumping this invalidates every cache entry.
inline constexpr const char* code_version = "wavespec-0.1.0";

}  // namespace wavespec
