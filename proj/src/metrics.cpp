#include "relab/logging/metrics.hpp"

#include <nlohmann/json.hpp>

#include "relab/error.hpp"

namespace relab::logging {
namespace {

using nlohmann::json;

json action_to_json(const buffer::Action& a) {
  if (a.kind == buffer::Action::Kind::discrete) return a.index;
  return a.values;
}

buffer::Action action_from_json(const json& j, const std::string& where) {
  if (j.is_number_integer()) return buffer::Action::make_discrete(j.get<int>());
  if (j.is_array()) return buffer::Action::make_continuous(j.get<std::vector<double>>());
  throw SchemaError(where + ": action must be an integer or an array of reals");
}

/// All lines of a text file, in order. getline swallows the newline, so a
/// torn final write shows up as an unparseable last element.
std::vector<std::string> read_lines(const std::filesystem::path& path,
                                    const std::string& what) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + what + " '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::filesystem::path& path)
    : out_(path, std::ios::app), path_(path.string()) {
  if (!out_) throw FileError("cannot open metrics file '" + path_ + "' for append");
}

void MetricsWriter::append(const MetricRecord& r) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = last_step_.try_emplace(r.name, r.step);
  if (!inserted) {
    if (r.step < it->second)
      throw StateError("metrics stream '" + r.name + "' went backwards: step " +
                       std::to_string(r.step) + " after " + std::to_string(it->second));
    it->second = r.step;
  }
  const json line = {
      {"step", r.step}, {"name", r.name}, {"value", r.value}, {"wall_time", r.wall_time}};
  out_ << line.dump() << '\n' << std::flush;
  if (!out_) throw FileError("write to metrics file '" + path_ + "' failed");
}

void MetricsWriter::append(long step, const std::string& name, double value,
                           double wall_time) {
  append(MetricRecord{step, name, value, wall_time});
}

std::vector<MetricRecord> read_metrics(const std::filesystem::path& path) {
  const auto lines = read_lines(path, "metrics file");
  std::vector<MetricRecord> records;
  records.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool last = i + 1 == lines.size();
    const json j = json::parse(lines[i], nullptr, /*allow_exceptions=*/false);
    const bool shaped = j.is_object() && j.contains("step") && j["step"].is_number_integer() &&
                        j.contains("name") && j["name"].is_string() && j.contains("value") &&
                        j["value"].is_number() && j.contains("wall_time") &&
                        j["wall_time"].is_number();
    if (!shaped) {
      if (last) break;  // torn tail from a crash mid-append
      throw SchemaError("malformed metrics record at line " + std::to_string(i + 1) + " of '" +
                        path.string() + "'");
    }
    records.push_back(MetricRecord{j["step"].get<long>(), j["name"].get<std::string>(),
                                   j["value"].get<double>(), j["wall_time"].get<double>()});
  }
  return records;
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path)
    : out_(path, std::ios::trunc), path_(path.string()) {
  if (!out_) throw FileError("cannot open trajectory file '" + path_ + "'");
}

void TrajectoryWriter::record(long step, const std::vector<double>& observation,
                              const buffer::Action& action, double reward) {
  const json line = {{"step", step},
                     {"observation", observation},
                     {"action", action_to_json(action)},
                     {"reward", reward}};
  out_ << line.dump() << '\n' << std::flush;
  if (!out_) throw FileError("write to trajectory file '" + path_ + "' failed");
}

std::vector<TrajectoryRecord> read_trajectory(const std::filesystem::path& path) {
  const auto lines = read_lines(path, "trajectory file");
  std::vector<TrajectoryRecord> records;
  records.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where =
        "trajectory record at line " + std::to_string(i + 1) + " of '" + path.string() + "'";
    const json j = json::parse(lines[i], nullptr, /*allow_exceptions=*/false);
    if (!j.is_object() || !j.contains("step") || !j["step"].is_number_integer() ||
        !j.contains("observation") || !j["observation"].is_array() || !j.contains("action") ||
        !j.contains("reward") || !j["reward"].is_number())
      throw SchemaError("malformed " + where);
    TrajectoryRecord r;
    r.step = j["step"].get<long>();
    r.observation = j["observation"].get<std::vector<double>>();
    r.action = action_from_json(j["action"], where);
    r.reward = j["reward"].get<double>();
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace relab::logging
