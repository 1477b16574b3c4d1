#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace relab::config {

/**
 * A run configuration: four flat tables (env, agent, optim, train) of scalar
 * values. Documents are JSON on disk; the in-memory form keeps each table as
 * a JSON object restricted to scalars. Unknown keys are preserved (components
 * warn once about keys they do not consume), missing tables or non-scalar
 * values are schema errors.
 */
class ConfigTree {
public:
  static const std::vector<std::string>& table_names();

  /// Built-in default: DQN on CartPole.
  static ConfigTree defaults();

  static ConfigTree load_file(const std::string& path);
  static ConfigTree parse(const std::string& text, const std::string& origin);
  static ConfigTree from_json(const nlohmann::json& doc, const std::string& origin);

  nlohmann::json& table(const std::string& name);
  const nlohmann::json& table(const std::string& name) const;

  bool has(const std::string& table, const std::string& key) const;

  /// Typed getters; a present key of the wrong type raises TypeError.
  bool get_bool(const std::string& table, const std::string& key, bool fallback) const;
  std::int64_t get_int(const std::string& table, const std::string& key,
                       std::int64_t fallback) const;
  double get_real(const std::string& table, const std::string& key, double fallback) const;
  std::string get_string(const std::string& table, const std::string& key,
                         const std::string& fallback) const;

  /**
   * Applies a command-line override. The raw string is coerced to the type of
   * the existing value; for new or null keys the first parse that consumes the
   * whole token wins, trying integer, then real, then bool, then string.
   */
  void apply_override(const std::string& table, const std::string& key,
                      const std::string& raw);

  nlohmann::json to_json() const;
  std::string serialize() const;  ///< stable two-space-indented document

private:
  nlohmann::json doc_ = nlohmann::json::object();
};

/// One `--table.key value` from the command line.
struct Override {
  std::string table;
  std::string key;
  std::string raw;
};

/**
 * Maps a dotted reference like "config.dqn.cartpole" to
 * "<root>/config/dqn/cartpole.json". Raises FileError naming the resolved
 * path when the file does not exist.
 */
std::string resolve_ref(const std::string& ref, const std::string& root = ".");

/**
 * Warns (once per process per table.key) about keys in `table` that are not
 * in `known`. Components call this with the keys they consume.
 */
void warn_unknown_keys(const ConfigTree& cfg, const std::string& table,
                       const std::vector<std::string>& known);

}  // namespace relab::config
