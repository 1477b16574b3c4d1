#include "relab/cli/cli.hpp"

#include <cstdio>
#include <sstream>

#include "relab/agent/registry.hpp"
#include "relab/env/env.hpp"
#include "relab/error.hpp"
#include "relab/net/registry.hpp"

namespace relab::cli {
namespace {

const char* mode_flag(run::RunMode mode) {
  switch (mode) {
    case run::RunMode::single: return "--single";
    case run::RunMode::sync: return "--sync";
    case run::RunMode::async: return "--async";
    case run::RunMode::eval: return "--eval";
  }
  return "?";
}

/// --agent.gamma -> {agent, gamma}; rejects tables the config does not have.
config::Override split_override(const std::string& flag) {
  const std::string body = flag.substr(2);
  const auto dot = body.find('.');
  config::Override o;
  o.table = body.substr(0, dot);
  o.key = body.substr(dot + 1);
  bool known = false;
  for (const auto& t : config::ConfigTree::table_names()) known = known || t == o.table;
  if (!known)
    throw UsageError("unknown config table in '" + flag +
                     "'; expected env, agent, optim or train");
  if (o.key.empty()) throw UsageError("missing key in '" + flag + "'");
  return o;
}

}  // namespace

CliOptions parse_args(const std::vector<std::string>& args) {
  CliOptions opts;
  bool mode_set = false;

  const auto set_mode = [&](run::RunMode mode, const std::string& flag) {
    if (mode_set && opts.mode != mode)
      throw UsageError("conflicting launch modes " + std::string(mode_flag(opts.mode)) +
                       " and " + flag + "; pick one");
    opts.mode = mode;
    mode_set = true;
  };

  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    const auto value_for = [&](const std::string& flag) -> const std::string& {
      if (i + 1 >= args.size()) throw UsageError("flag '" + flag + "' expects a value");
      return args[++i];
    };

    if (arg == "--help" || arg == "-h") {
      opts.help = true;
    } else if (arg == "--single") {
      set_mode(run::RunMode::single, arg);
    } else if (arg == "--sync") {
      set_mode(run::RunMode::sync, arg);
    } else if (arg == "--async") {
      set_mode(run::RunMode::async, arg);
    } else if (arg == "--eval") {
      set_mode(run::RunMode::eval, arg);
    } else if (arg == "--config") {
      opts.config_ref = value_for(arg);
    } else if (arg.rfind("--", 0) == 0 && arg.find('.') != std::string::npos) {
      auto o = split_override(arg);
      o.raw = value_for(arg);
      opts.overrides.push_back(std::move(o));
    } else if (arg.rfind("-", 0) == 0) {
      throw UsageError("unknown flag '" + arg + "'; see --help");
    } else {
      throw UsageError("unexpected argument '" + arg + "'; see --help");
    }
  }
  return opts;
}

std::string help_text() {
  std::ostringstream out;
  out << "usage: relab [mode] [--config REF] [--TABLE.KEY VALUE ...]\n"
      << "\n"
      << "modes:\n"
      << "  --single   one process interleaving act, store, learn (default)\n"
      << "  --sync     distributed; actors and learner advance in lockstep rounds\n"
      << "  --async    distributed; the learner consumes whatever finishes in its window\n"
      << "  --eval     no training; score the parameters under train.load_path\n"
      << "\n"
      << "config:\n"
      << "  --config REF      dotted reference: config.dqn.cartpole loads\n"
      << "                    config/dqn/cartpole.json (default: built-in DQN cartpole)\n"
      << "  --TABLE.KEY VALUE override one entry, applied left to right after the file\n"
      << "                    loads; tables: env, agent, optim, train\n"
      << "\n";
  out << "agents:\n";
  for (const auto& name : agent::agent_names()) out << "  " << name << "\n";
  out << "environments:\n";
  for (const auto& name : env::env_names()) out << "  " << name << "\n";
  out << "networks:\n";
  for (const auto& name : net::network_names()) out << "  " << name << "\n";
  return std::move(out).str();
}

config::ConfigTree load_cli_config(const CliOptions& opts, const std::string& config_root) {
  auto cfg = opts.config_ref.empty()
                 ? config::ConfigTree::defaults()
                 : config::ConfigTree::load_file(config::resolve_ref(opts.config_ref, config_root));
  for (const auto& o : opts.overrides) cfg.apply_override(o.table, o.key, o.raw);
  return cfg;
}

run::RunSummary run_cli(const CliOptions& opts, const run::RunOptions& run_opts,
                        const std::string& config_root) {
  return run::execute(opts.mode, load_cli_config(opts, config_root), run_opts);
}

int main_entry(int argc, char** argv) {
  try {
    const auto opts = parse_args({argv + 1, argv + argc});
    if (opts.help) {
      std::fputs(help_text().c_str(), stdout);
      return 0;
    }
    const auto summary = run_cli(opts);
    std::printf("[run] finished: steps=%ld updates=%ld best=%.3f final=%.3f\n",
                summary.global_steps, summary.learner_updates, summary.best_score,
                summary.final_score);
    std::printf("[run] artifacts in %s\n", summary.run_dir.string().c_str());
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), help_text().c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace relab::cli
