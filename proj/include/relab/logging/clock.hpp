#pragma once

#include <cstdint>
#include <string>

namespace relab::logging {

/**
 * Time source for run-directory names and metric stamps. Injectable so tests
 * can pin timestamps; values are milliseconds since the Unix epoch.
 */
class Clock {
public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
public:
  std::int64_t now_ms() const override;
};

/// Fixed, manually advanced time for tests.
class ManualClock final : public Clock {
public:
  explicit ManualClock(std::int64_t start_ms = 0) : ms_(start_ms) {}

  std::int64_t now_ms() const override { return ms_; }
  void advance(std::int64_t delta_ms) { ms_ += delta_ms; }
  void set(std::int64_t ms) { ms_ = ms; }

private:
  std::int64_t ms_ = 0;
};

/// UTC timestamp of the form YYYYMMDDhhmmss, as used in run directory names.
std::string format_timestamp(std::int64_t epoch_ms);

}  // namespace relab::logging
