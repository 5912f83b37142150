#pragma once

namespace lfir {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Bumped whenever a persisted file layout (model/controller JSON, trajectory
// or estimate CSV) changes incompatibly.
inline constexpr const char* kSchemaVersion = "1";

}  // namespace lfir
