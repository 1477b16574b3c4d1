#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "relab/buffer/transition.hpp"

namespace relab::logging {

/// One scalar sample on a named stream. wall_time is seconds since the epoch.
struct MetricRecord {
  long step = 0;
  std::string name;
  double value = 0.0;
  double wall_time = 0.0;
};

/**
 * Append-only line-delimited metrics file. Steps must be non-decreasing per
 * stream name; appends are atomic at record granularity, so the learner and
 * the manager thread may share one writer.
 */
class MetricsWriter {
public:
  explicit MetricsWriter(const std::filesystem::path& path);

  void append(const MetricRecord& record);
  void append(long step, const std::string& name, double value, double wall_time);

private:
  std::ofstream out_;
  std::mutex mu_;
  std::map<std::string, long> last_step_;
  std::string path_;
};

/**
 * Reads a metrics file back. A truncated final line (crash mid-append) is
 * ignored; a malformed record anywhere else raises SchemaError.
 */
std::vector<MetricRecord> read_metrics(const std::filesystem::path& path);

/**
 * One step of a recorded episode: the observation the action was taken from,
 * the action, and the reward it earned. Record 0 carries the reset
 * observation, so no episode record is ever empty.
 */
struct TrajectoryRecord {
  long step = 0;
  std::vector<double> observation;
  buffer::Action action;
  double reward = 0.0;
};

/// Line-delimited episode record, sufficient to replay the episode.
class TrajectoryWriter {
public:
  explicit TrajectoryWriter(const std::filesystem::path& path);

  void record(long step, const std::vector<double>& observation, const buffer::Action& action,
              double reward);

private:
  std::ofstream out_;
  std::string path_;
};

std::vector<TrajectoryRecord> read_trajectory(const std::filesystem::path& path);

}  // namespace relab::logging
