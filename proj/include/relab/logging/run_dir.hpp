#pragma once

#include <filesystem>
#include <string>

#include "relab/config/config.hpp"
#include "relab/logging/clock.hpp"

namespace relab::logging {

/**
 * Per-run output directory of the form <root>/<env>/<agent>/<timestamp>.
 * Created once at startup; over a run it accumulates the config copy, the
 * metrics file, checkpoints and trajectory records.
 */
struct RunDir {
  std::filesystem::path path;

  std::filesystem::path config_file() const { return path / "config.json"; }
  std::filesystem::path metrics_file() const { return path / "metrics.jsonl"; }
  std::filesystem::path checkpoint_file(long step) const;
  std::filesystem::path trajectory_file(long step) const;
};

/**
 * Creates <logs_root>/<env>/<agent>/<YYYYMMDDhhmmss> and writes the loaded
 * config into it verbatim. When the timestamped name already exists the
 * directory gets a -1, -2, ... suffix; an unwritable root raises FileError.
 */
RunDir make_run_dir(const std::filesystem::path& logs_root, const std::string& env_name,
                    const std::string& agent_name, const config::ConfigTree& cfg,
                    const Clock& clock);

}  // namespace relab::logging
