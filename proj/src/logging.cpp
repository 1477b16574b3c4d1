#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <system_error>

#include "relab/error.hpp"
#include "relab/logging/run_dir.hpp"

namespace relab::logging {

std::int64_t SystemClock::now_ms() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_timestamp(std::int64_t epoch_ms) {
  const auto secs = static_cast<std::time_t>(epoch_ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d%02d%02d%02d", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::filesystem::path RunDir::checkpoint_file(long step) const {
  char buf[40];
  std::snprintf(buf, sizeof buf, "checkpoint_%012ld.ckpt", step);
  return path / buf;
}

std::filesystem::path RunDir::trajectory_file(long step) const {
  char buf[40];
  std::snprintf(buf, sizeof buf, "trajectory_%012ld.jsonl", step);
  return path / buf;
}

RunDir make_run_dir(const std::filesystem::path& logs_root, const std::string& env_name,
                    const std::string& agent_name, const config::ConfigTree& cfg,
                    const Clock& clock) {
  namespace fs = std::filesystem;

  const fs::path parent = logs_root / env_name / agent_name;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec)
    throw FileError("cannot create run directory under '" + parent.string() +
                    "': " + ec.message());

  const std::string stamp = format_timestamp(clock.now_ms());
  fs::path dir = parent / stamp;
  for (int suffix = 1;; ++suffix) {
    std::error_code mk;
    if (fs::create_directory(dir, mk)) break;
    if (mk)
      throw FileError("cannot create run directory '" + dir.string() + "': " + mk.message());
    if (suffix > 9999)
      throw FileError("run directory collision limit reached under '" + parent.string() + "'");
    dir = parent / (stamp + "-" + std::to_string(suffix));
  }

  RunDir run{dir};
  std::ofstream out(run.config_file());
  out << cfg.serialize() << '\n';
  if (!out)
    throw FileError("cannot write config copy '" + run.config_file().string() + "'");
  return run;
}

}  // namespace relab::logging
