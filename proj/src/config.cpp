#include "relab/config/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "relab/error.hpp"

namespace relab::config {

namespace {

bool is_scalar(const nlohmann::json& v) {
  return v.is_string() || v.is_number() || v.is_boolean() || v.is_null();
}

bool parse_full_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

bool parse_full_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "True") {
    out = true;
    return true;
  }
  if (s == "false" || s == "False") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

const std::vector<std::string>& ConfigTree::table_names() {
  static const std::vector<std::string> names{"env", "agent", "optim", "train"};
  return names;
}

ConfigTree ConfigTree::defaults() {
  // mirrors config/dqn/cartpole.json, the canonical starting point
  return from_json(nlohmann::json{
                       {"env", {{"name", "cartpole"}, {"action_type", "discrete"}, {"render", false}}},
                       {"agent",
                        {{"name", "dqn"},
                         {"network", "discrete_q_network"},
                         {"gamma", 0.99},
                         {"epsilon_init", 1.0},
                         {"epsilon_min", 0.01},
                         {"explore_ratio", 0.2},
                         {"buffer_size", 50000},
                         {"batch_size", 32},
                         {"start_train_step", 2000},
                         {"target_update_period", 500}}},
                       {"optim", {{"name", "adam"}, {"lr", 0.0001}}},
                       {"train",
                        {{"training", true},
                         {"seed", 42},
                         {"run_step", 100000},
                         {"print_period", 1000},
                         {"save_period", 10000},
                         {"eval_iteration", 10},
                         {"update_period", 32},
                         {"num_workers", 8},
                         {"load_path", nullptr}}},
                   },
                   "<defaults>");
}

ConfigTree ConfigTree::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("config file '" + path + "' cannot be opened");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

ConfigTree ConfigTree::parse(const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("config '" + origin + "': " + e.what());
  }
  return from_json(doc, origin);
}

ConfigTree ConfigTree::from_json(const nlohmann::json& doc, const std::string& origin) {
  if (!doc.is_object())
    throw SchemaError("config '" + origin + "': top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const auto& name : table_names()) known = known || key == name;
    if (!known)
      throw SchemaError("config '" + origin + "': unexpected top-level table '" + key + "'");
  }
  ConfigTree tree;
  for (const auto& name : table_names()) {
    if (!doc.contains(name))
      throw SchemaError("config '" + origin + "': missing table '" + name + "'");
    const auto& table = doc.at(name);
    if (!table.is_object())
      throw SchemaError("config '" + origin + "': table '" + name + "' must be an object");
    for (const auto& [key, value] : table.items()) {
      if (!is_scalar(value))
        throw SchemaError("config '" + origin + "': value '" + name + "." + key +
                          "' must be a scalar");
    }
    tree.doc_[name] = table;
  }
  return tree;
}

nlohmann::json& ConfigTree::table(const std::string& name) {
  if (!doc_.contains(name)) throw SchemaError("config: no table named '" + name + "'");
  return doc_[name];
}

const nlohmann::json& ConfigTree::table(const std::string& name) const {
  if (!doc_.contains(name)) throw SchemaError("config: no table named '" + name + "'");
  return doc_.at(name);
}

bool ConfigTree::has(const std::string& table_name, const std::string& key) const {
  const auto& t = table(table_name);
  return t.contains(key) && !t.at(key).is_null();
}

bool ConfigTree::get_bool(const std::string& table_name, const std::string& key,
                          bool fallback) const {
  if (!has(table_name, key)) return fallback;
  const auto& v = table(table_name).at(key);
  if (!v.is_boolean())
    throw TypeError("config: '" + table_name + "." + key + "' is not a bool");
  return v.get<bool>();
}

std::int64_t ConfigTree::get_int(const std::string& table_name, const std::string& key,
                                 std::int64_t fallback) const {
  if (!has(table_name, key)) return fallback;
  const auto& v = table(table_name).at(key);
  if (!v.is_number_integer())
    throw TypeError("config: '" + table_name + "." + key + "' is not an integer");
  return v.get<std::int64_t>();
}

double ConfigTree::get_real(const std::string& table_name, const std::string& key,
                            double fallback) const {
  if (!has(table_name, key)) return fallback;
  const auto& v = table(table_name).at(key);
  if (!v.is_number())
    throw TypeError("config: '" + table_name + "." + key + "' is not a number");
  return v.get<double>();
}

std::string ConfigTree::get_string(const std::string& table_name, const std::string& key,
                                   const std::string& fallback) const {
  if (!has(table_name, key)) return fallback;
  const auto& v = table(table_name).at(key);
  if (!v.is_string())
    throw TypeError("config: '" + table_name + "." + key + "' is not a string");
  return v.get<std::string>();
}

void ConfigTree::apply_override(const std::string& table_name, const std::string& key,
                                const std::string& raw) {
  auto& t = table(table_name);
  const std::string where = table_name + "." + key;

  std::int64_t as_int = 0;
  double as_real = 0.0;
  bool as_bool = false;

  if (t.contains(key) && !t.at(key).is_null()) {
    const auto& existing = t.at(key);
    if (existing.is_boolean()) {
      if (!parse_bool(raw, as_bool))
        throw TypeError("override '" + where + "': '" + raw + "' is not a bool");
      t[key] = as_bool;
    } else if (existing.is_number_integer()) {
      if (!parse_full_int(raw, as_int))
        throw TypeError("override '" + where + "': '" + raw + "' is not an integer");
      t[key] = as_int;
    } else if (existing.is_number_float()) {
      if (!parse_full_real(raw, as_real))
        throw TypeError("override '" + where + "': '" + raw + "' is not a number");
      t[key] = as_real;
    } else {
      t[key] = raw;
    }
    return;
  }

  // new or null-valued key: infer integer, then real, then bool, then string
  if (parse_full_int(raw, as_int))
    t[key] = as_int;
  else if (parse_full_real(raw, as_real))
    t[key] = as_real;
  else if (parse_bool(raw, as_bool))
    t[key] = as_bool;
  else
    t[key] = raw;
}

nlohmann::json ConfigTree::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& name : table_names()) out[name] = doc_.at(name);
  return out;
}

std::string ConfigTree::serialize() const { return to_json().dump(2) + "\n"; }

std::string resolve_ref(const std::string& ref, const std::string& root) {
  if (ref.empty()) throw FileError("config reference is empty");
  std::string rel;
  for (char c : ref) rel += c == '.' ? '/' : c;
  rel += ".json";
  const std::filesystem::path path = std::filesystem::path(root) / rel;
  if (!std::filesystem::exists(path))
    throw FileError("config reference '" + ref + "' resolves to '" + path.string() +
                    "', which does not exist");
  return path.string();
}

void warn_unknown_keys(const ConfigTree& cfg, const std::string& table,
                       const std::vector<std::string>& known) {
  static std::mutex mutex;
  static std::set<std::string> warned;
  for (const auto& [key, value] : cfg.table(table).items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (ok) continue;
    const std::string tag = table + "." + key;
    std::lock_guard<std::mutex> lock(mutex);
    if (warned.insert(tag).second)
      std::fprintf(stderr, "[relab] config: ignoring unknown key '%s'\n", tag.c_str());
  }
}

}  // namespace relab::config
