#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "relab/logging/clock.hpp"
#include "relab/logging/state_map.hpp"

namespace relab::logging {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Byte range of the header wall-time stamp: the only bytes allowed to differ
/// between two saves of identical state.
inline constexpr std::size_t kCheckpointTimeOffset = 12;
inline constexpr std::size_t kCheckpointTimeSize = 8;

struct CheckpointInfo {
  std::uint32_t format_version = 0;
  std::int64_t wall_time_ms = 0;
  long step = 0;
  std::string agent_name;
};

/**
 * Writes header (magic, format version, wall time, step, agent name) plus the
 * full state to a temporary file and renames it into place, so a crash never
 * leaves a half-written file under the final name.
 */
void save_checkpoint(const std::filesystem::path& path, const std::string& agent_name,
                     long step, const StateMap& state, const Clock& clock);

/// Header only. Raises CompatibilityError on bad magic or unknown version,
/// FileError when the file is missing or too short to hold a header.
CheckpointInfo peek_checkpoint(const std::filesystem::path& path);

/**
 * Loads a checkpoint. When expected_agent is non-empty, a different stored
 * agent name raises CompatibilityError; a truncated payload raises FileError.
 */
StateMap load_checkpoint(const std::filesystem::path& path, const std::string& expected_agent,
                         CheckpointInfo* info = nullptr);

}  // namespace relab::logging
