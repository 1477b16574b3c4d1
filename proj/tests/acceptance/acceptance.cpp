// Benchmark-style acceptance harness. Each numbered check below guards one
// externally visible promise of the framework; the program prints one
// PASS/FAIL line per check and exits nonzero if any of them fails. All
// tolerances and bars are pinned here as constants.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "relab/agent/pg.hpp"
#include "relab/agent/registry.hpp"
#include "relab/agent/targets.hpp"
#include "relab/buffer/sum_tree.hpp"
#include "relab/cli/cli.hpp"
#include "relab/config/config.hpp"
#include "relab/env/env.hpp"
#include "relab/error.hpp"
#include "relab/logging/checkpoint.hpp"
#include "relab/logging/clock.hpp"
#include "relab/logging/run_dir.hpp"
#include "relab/net/head.hpp"
#include "relab/net/registry.hpp"
#include "relab/net/spec.hpp"
#include "relab/nn/losses.hpp"
#include "relab/rng.hpp"
#include "relab/run/runtime.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace relab;
using std::chrono::steady_clock;

namespace {

// ---- pinned bars and tolerances ------------------------------------------

constexpr double kCartpoleBar = 400.0;    // of the 500-step return cap
constexpr double kReinforceBar = 300.0;   // higher-variance episodic learner
constexpr double kUntrainedCeiling = 40.0;
constexpr double kPendulumBar = -300.0;
constexpr long kRunStepCap = 100000;      // training budget per seed
constexpr double kRunWallLimitSec = 900;  // 15 minutes per training run
constexpr int kSeedsToPass = 2;           // of the three seeds below
const std::vector<long> kSeeds = {1, 2, 3};

constexpr double kTabularTol = 1e-6;      // Q-learning vs value iteration
constexpr double kMassTol = 1e-9;         // categorical projection mass drift
constexpr int kMassTriples = 10000;
constexpr double kChiSquareMinP = 0.01;   // proportional-sampling goodness of fit
constexpr int kChiSquareDraws = 100000;
constexpr double kFdTol = 1e-4;           // finite-difference relative error
constexpr int kFdInstances = 100;         // random problems per loss
constexpr long kStreamSteps = 1000;       // sync-vs-single equivalence horizon
constexpr int kLivenessSeconds = 30;      // async stall experiment length
constexpr double kLivenessRatio = 0.8;

const std::string kRepo = RELAB_REPO_DIR;

// ---- small utilities -------------------------------------------------------

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path dir = fs::temp_directory_path() / "relab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
  }();
  return root;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = scratch_root() / name;
  fs::create_directories(dir);
  return dir;
}

void say(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  std::printf("    ");
  std::vprintf(fmt, args);
  std::printf("\n");
  std::fflush(stdout);
  va_end(args);
}

config::ConfigTree shipped(const std::string& agent, const std::string& env) {
  return config::ConfigTree::load_file(kRepo + "/config/" + agent + "/" + env + ".json");
}

double untrained_score(const config::ConfigTree& cfg, int episodes) {
  auto env = run::env_from_config(cfg);
  auto agent = agent::build_agent(cfg, env->spec());
  agent->seed_streams(991, 0);
  return run::evaluate_policy(*agent, *env, episodes, 991);
}

struct SeenTransition {
  std::vector<double> state, next_state;
  int action;
  double reward, logprob, value;
  bool done, truncated;

  bool operator==(const SeenTransition& o) const {
    return state == o.state && next_state == o.next_state && action == o.action &&
           reward == o.reward && logprob == o.logprob && value == o.value && done == o.done &&
           truncated == o.truncated;
  }
};

std::function<void(const buffer::Transition&)> capture_into(std::vector<SeenTransition>& out) {
  return [&out](const buffer::Transition& t) {
    out.push_back({t.state, t.next_state, t.action.index, t.reward, t.logprob, t.value, t.done,
                   t.truncated});
  };
}

// ---- check 1 & 2: learning runs -------------------------------------------

struct LearningReport {
  bool ok = false;
  int passed = 0;
  int attempted = 0;
  double baseline = 0.0;
  double best = -1e300;
  double slowest_sec = 0.0;
};

/// Trains on up to three seeds, stopping as soon as the 2-of-3 verdict is
/// decided either way. A seed passes when an evaluation mean reaches `bar`
/// inside the step budget and the wall-clock limit.
LearningReport learning_check(const std::string& agent, const std::string& env, double bar) {
  LearningReport report;
  const auto cfg = shipped(agent, env);
  report.baseline = untrained_score(cfg, 10);

  for (const long seed : kSeeds) {
    if (report.passed >= kSeedsToPass) break;
    const int remaining = static_cast<int>(kSeeds.size()) - report.attempted;
    if (report.passed + remaining < kSeedsToPass) break;

    auto tuned = cfg;
    tuned.apply_override("train", "seed", std::to_string(seed));
    tuned.apply_override("train", "run_step", std::to_string(kRunStepCap));
    tuned.apply_override("train", "print_period", "2000");
    tuned.apply_override("train", "eval_iteration", "5");
    tuned.apply_override("train", "save_period", "1000000");

    run::RunOptions opts;
    opts.logs_root = scratch("learning/" + agent);
    opts.stop_on_eval_score = bar;
    opts.wall_clock_limit_ms = static_cast<std::int64_t>(kRunWallLimitSec * 1000);

    const auto t0 = steady_clock::now();
    const auto summary = run::run_single(tuned, opts);
    const double sec = std::chrono::duration<double>(steady_clock::now() - t0).count();

    ++report.attempted;
    report.slowest_sec = std::max(report.slowest_sec, sec);
    report.best = std::max(report.best, summary.best_score);
    if (summary.best_score >= bar && sec < kRunWallLimitSec) ++report.passed;
    say("%s seed %ld: best %.1f after %ld steps, %.0fs%s", agent.c_str(), seed,
        summary.best_score, summary.global_steps, sec,
        summary.best_score >= bar ? "" : " (below bar)");
  }
  report.ok = report.baseline < kUntrainedCeiling && report.passed >= kSeedsToPass;
  return report;
}

bool check_cartpole_learning() {
  const std::vector<std::string> value_and_policy = {
      "dqn", "double", "dueling", "multistep", "per", "noisy", "c51", "qr_dqn", "rainbow", "ppo"};
  bool ok = true;
  for (const auto& agent : value_and_policy) {
    const auto report = learning_check(agent, "cartpole", kCartpoleBar);
    say("%s: baseline %.1f, %d/%d seeds reached %.0f, best %.1f", agent.c_str(),
        report.baseline, report.passed, report.attempted, kCartpoleBar, report.best);
    ok = ok && report.ok;
  }
  const auto reinforce = learning_check("reinforce", "cartpole", kReinforceBar);
  say("reinforce: baseline %.1f, %d/%d seeds reached %.0f, best %.1f", reinforce.baseline,
      reinforce.passed, reinforce.attempted, kReinforceBar, reinforce.best);
  return ok && reinforce.ok;
}

bool check_pendulum_learning() {
  const auto report = learning_check("ddpg", "pendulum", kPendulumBar);
  say("ddpg: baseline %.1f, %d/%d seeds reached %.0f, best %.1f", report.baseline,
      report.passed, report.attempted, kPendulumBar, report.best);
  // the baseline ceiling is a cartpole notion; here the bar itself is the test
  return report.passed >= kSeedsToPass && report.baseline < kPendulumBar;
}

// ---- check 3: oracle equivalence -------------------------------------------

bool check_tabular_q_learning() {
  // independent model of the 5-cell corridor: action 1 steps right, action 0
  // steps left, the rightmost cell pays 1 and terminates
  constexpr int L = 5;
  constexpr double gamma = 0.9;
  oracle::TabularMdp mdp;
  mdp.next.resize(L);
  mdp.reward.resize(L);
  mdp.terminal.assign(L, 0);
  mdp.terminal[L - 1] = 1;
  for (int s = 0; s < L; ++s) {
    mdp.next[s] = {std::max(s - 1, 0), std::min(s + 1, L - 1)};
    mdp.reward[s] = {0.0, s + 1 == L - 1 ? 1.0 : 0.0};
  }
  const auto v = oracle::value_iteration(mdp, gamma);
  const auto q_ref = oracle::q_from_values(mdp, v, gamma);

  // tabular Q-learning driven by the framework's environment; learning rate 1
  // makes each update an exact Bellman backup on this deterministic task
  auto env = env::build_env("gridworld", L);
  std::vector<std::array<double, 2>> q(L, {0.0, 0.0});
  Rng rng(2024);
  for (int episode = 0; episode < 500; ++episode) {
    auto obs = env->reset(rng.next_u64());
    int s = static_cast<int>(std::max_element(obs.begin(), obs.end()) - obs.begin());
    while (true) {
      const int a = static_cast<int>(rng.uniform_int(2));
      const auto r = env->step(buffer::Action::make_discrete(a));
      const int ns =
          static_cast<int>(std::max_element(r.observation.begin(), r.observation.end()) -
                           r.observation.begin());
      const double bootstrap = r.done ? 0.0 : gamma * std::max(q[ns][0], q[ns][1]);
      q[s][a] = r.reward + bootstrap;
      s = ns;
      if (r.done || r.truncated) break;
    }
  }

  double worst = 0.0;
  for (int s = 0; s + 1 < L; ++s)
    for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(q[s][a] - q_ref[s][a]));
  say("tabular q-learning vs value iteration: max |dQ| = %.3g (tol %g)", worst, kTabularTol);
  return worst <= kTabularTol;
}

bool check_projection_mass() {
  const net::CategoricalSupport support(-10.0, 10.0, 51);
  Rng rng(515);
  double worst = 0.0;
  std::vector<double> src(support.n_atoms), dst(support.n_atoms);
  for (int i = 0; i < kMassTriples; ++i) {
    double total = 0.0;
    for (auto& p : src) total += (p = rng.uniform(0.0, 1.0));
    for (auto& p : src) p /= total;
    const double reward = rng.uniform(-15.0, 15.0);  // may land beyond the support
    const bool done = rng.uniform() < 0.2;
    const double gamma_n = std::pow(rng.uniform(0.9, 0.999), 1 + rng.uniform_int(3));
    agent::c51_project(reward, done, gamma_n, support, src.data(), dst.data());
    double mass = 0.0;
    for (const double p : dst) {
      if (p < 0.0) return false;
      mass += p;
    }
    worst = std::max(worst, std::abs(mass - 1.0));
  }
  say("categorical projection: max |mass - 1| = %.3g over %d triples (tol %g)", worst,
      kMassTriples, kMassTol);
  return worst <= kMassTol;
}

bool check_proportional_sampling() {
  constexpr int kLeaves = 64;
  buffer::SumTree tree(kLeaves);
  Rng rng(31337);
  std::vector<double> priorities(kLeaves);
  for (int i = 0; i < kLeaves; ++i) tree.update(i, priorities[i] = rng.uniform(0.05, 5.0));

  std::vector<double> observed(kLeaves, 0.0);
  for (int n = 0; n < kChiSquareDraws; ++n)
    observed[static_cast<std::size_t>(tree.query(rng.uniform() * tree.total()))] += 1.0;

  // brute-force expectation: flat-array normalization of the priorities
  double total = 0.0;
  for (const double p : priorities) total += p;
  std::vector<double> expected(kLeaves);
  for (int i = 0; i < kLeaves; ++i) expected[i] = kChiSquareDraws * priorities[i] / total;

  const double p = oracle::chi_square_p(observed, expected);
  say("proportional sampling: chi-square p = %.4f over %d draws (min %g)", p, kChiSquareDraws,
      kChiSquareMinP);
  return p > kChiSquareMinP;
}

bool check_oracles() {
  const bool a = check_tabular_q_learning();
  const bool b = check_projection_mass();
  const bool c = check_proportional_sampling();
  return a && b && c;
}

// ---- check 4: gradient correctness -----------------------------------------

nn::Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  nn::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<std::pair<double*, double>> matrix_entries(nn::Matrix& value,
                                                       const nn::Matrix& grad) {
  std::vector<std::pair<double*, double>> entries;
  for (int i = 0; i < value.rows(); ++i)
    for (int j = 0; j < value.cols(); ++j) entries.push_back({&value(i, j), grad(i, j)});
  return entries;
}

std::vector<std::pair<double*, double>> head_entries(net::Head& head) {
  std::vector<std::pair<double*, double>> entries;
  for (auto* p : head.parameters())
    for (int i = 0; i < p->value.rows(); ++i)
      for (int j = 0; j < p->value.cols(); ++j)
        entries.push_back({&p->value(i, j), p->grad(i, j)});
  return entries;
}

void zero_grads(net::Head& head) {
  for (auto* p : head.parameters()) p->zero_grad();
}

struct FdTally {
  int instances = 0;
  int failed = 0;
  double worst = 0.0;

  void fold(const oracle::GradCheckResult& r) {
    ++instances;
    failed += r.failed;
    worst = std::max(worst, r.worst);
  }
  bool ok() const { return instances >= kFdInstances && failed == 0; }
};

FdTally fd_mse() {
  Rng rng(601);
  FdTally tally;
  for (int n = 0; n < kFdInstances; ++n) {
    nn::Matrix pred = random_matrix(4, 3, rng, 2.0);
    const nn::Matrix target = random_matrix(4, 3, rng, 2.0);
    std::vector<double> w = {0.5, 1.0, 2.0, 0.25};
    const auto res = nn::mse_loss(pred, target, &w);
    tally.fold(oracle::fd_check([&] { return nn::mse_loss(pred, target, &w).value; },
                                matrix_entries(pred, res.grad), 1e-5, kFdTol));
  }
  return tally;
}

FdTally fd_huber() {
  Rng rng(602);
  FdTally tally;
  while (tally.instances < kFdInstances) {
    const double kappa = rng.uniform(0.5, 2.0);
    nn::Matrix pred = random_matrix(4, 3, rng, 3.0);
    const nn::Matrix target = random_matrix(4, 3, rng, 3.0);
    bool near_kink = false;
    for (int i = 0; i < pred.rows() && !near_kink; ++i)
      for (int j = 0; j < pred.cols(); ++j)
        if (std::abs(std::abs(pred(i, j) - target(i, j)) - kappa) < 5e-3) near_kink = true;
    if (near_kink) continue;
    const auto res = nn::huber_loss(pred, target, kappa);
    tally.fold(oracle::fd_check([&] { return nn::huber_loss(pred, target, kappa).value; },
                                matrix_entries(pred, res.grad), 1e-5, kFdTol));
  }
  return tally;
}

FdTally fd_categorical_ce() {
  Rng rng(603);
  FdTally tally;
  const int batch = 4, n_actions = 3, n_atoms = 5;
  for (int n = 0; n < kFdInstances; ++n) {
    nn::Matrix logits = random_matrix(batch, n_actions * n_atoms, rng, 1.5);
    nn::Matrix projected(batch, n_atoms);
    std::vector<int> actions(batch);
    std::vector<double> weights(batch);
    for (int i = 0; i < batch; ++i) {
      double total = 0.0;
      for (int j = 0; j < n_atoms; ++j) total += (projected(i, j) = rng.uniform(0.01, 1.0));
      for (int j = 0; j < n_atoms; ++j) projected(i, j) /= total;
      actions[i] = static_cast<int>(rng.uniform_int(n_actions));
      weights[i] = rng.uniform(0.25, 2.0);
    }
    const auto res =
        agent::categorical_ce_loss(logits, projected, actions, n_actions, n_atoms, &weights);
    tally.fold(oracle::fd_check(
        [&] {
          return agent::categorical_ce_loss(logits, projected, actions, n_actions, n_atoms,
                                            &weights)
              .value;
        },
        matrix_entries(logits, res.grad), 1e-5, kFdTol));
  }
  return tally;
}

FdTally fd_quantile_huber() {
  Rng rng(604);
  FdTally tally;
  const int batch = 3, n_quant = 5;
  const auto taus = net::quantile_taus(n_quant);
  while (tally.instances < kFdInstances) {
    nn::Matrix pred = random_matrix(batch, n_quant, rng, 2.0);
    const nn::Matrix target = random_matrix(batch, n_quant, rng, 2.0);
    bool near_kink = false;
    for (int i = 0; i < batch && !near_kink; ++i)
      for (int p = 0; p < n_quant && !near_kink; ++p)
        for (int t = 0; t < n_quant; ++t) {
          const double u = target(i, t) - pred(i, p);
          if (std::abs(u) < 2e-3 || std::abs(std::abs(u) - 1.0) < 2e-3) near_kink = true;
        }
    if (near_kink) continue;
    const auto res = agent::quantile_huber_loss(pred, target, taus, 1.0);
    tally.fold(
        oracle::fd_check([&] { return agent::quantile_huber_loss(pred, target, taus, 1.0).value; },
                         matrix_entries(pred, res.grad), 1e-5, kFdTol));
  }
  return tally;
}

FdTally fd_ppo_surrogate() {
  Rng rng(605);
  FdTally tally;
  const int batch = 5, n_actions = 3;
  net::NetworkSpec spec;
  spec.in_dim = 4;
  spec.n_actions = n_actions;
  spec.hidden = {6};
  spec.hidden_act = nn::Activation::tanh;

  while (tally.instances < kFdInstances) {
    auto head = net::build_network("discrete_policy_value_network", spec);
    Rng init(rng.next_u64());
    head->init(init);
    const nn::Matrix x = random_matrix(batch, 4, rng);
    const nn::Matrix out0 = head->forward(x, false);

    std::vector<int> actions(batch);
    std::vector<double> old_logprobs(batch), advantages(batch), returns(batch);
    bool near_kink = false;
    for (int i = 0; i < batch; ++i) {
      actions[i] = static_cast<int>(rng.uniform_int(n_actions));
      const auto p = agent::softmax_row(out0, i, n_actions);
      old_logprobs[i] = std::log(p[actions[i]]) - rng.uniform(-0.45, 0.45);
      advantages[i] = rng.uniform(-2.0, 2.0);
      returns[i] = rng.uniform(-1.0, 1.0);
      const double ratio = std::exp(std::log(p[actions[i]]) - old_logprobs[i]);
      if (std::abs(ratio - 0.8) < 1e-2 || std::abs(ratio - 1.2) < 1e-2 ||
          std::abs(advantages[i]) < 1e-2)
        near_kink = true;
    }
    if (near_kink) continue;

    const nn::Matrix out = head->forward(x, false);
    const auto res =
        agent::ppo_surrogate(out, actions, old_logprobs, advantages, returns, 0.2, 0.5, 0.01);
    zero_grads(*head);
    head->backward(res.grad);
    tally.fold(oracle::fd_check(
        [&] {
          return agent::ppo_surrogate(head->forward(x, false), actions, old_logprobs,
                                      advantages, returns, 0.2, 0.5, 0.01)
              .value;
        },
        head_entries(*head), 1e-5, kFdTol));
  }
  return tally;
}

/// DDPG critic regression and actor ascent objectives, checked through the
/// full network pair the way the agent itself wires them.
std::pair<FdTally, FdTally> fd_ddpg() {
  Rng rng(606);
  FdTally critic_tally, actor_tally;
  const int batch = 4, obs = 3, act = 2;

  net::NetworkSpec actor_spec;
  actor_spec.in_dim = obs;
  actor_spec.out_dim = act;
  actor_spec.hidden = {6};
  actor_spec.hidden_act = nn::Activation::tanh;
  actor_spec.action_low = {-2.0, -1.0};
  actor_spec.action_high = {2.0, 1.0};

  net::NetworkSpec critic_spec;
  critic_spec.in_dim = obs + act;
  critic_spec.out_dim = 1;
  critic_spec.hidden = {6};
  critic_spec.hidden_act = nn::Activation::tanh;

  for (int n = 0; n < kFdInstances; ++n) {
    net::DeterministicActorHead actor(actor_spec);
    net::MlpHead critic(critic_spec);
    Rng init(rng.next_u64());
    actor.init(init);
    critic.init(init);

    const nn::Matrix s = random_matrix(batch, obs, rng);
    const nn::Matrix a = random_matrix(batch, act, rng, 0.8);
    std::vector<double> y(batch);
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);

    const auto joint = [&](const nn::Matrix& actions) {
      nn::Matrix j(batch, obs + act);
      for (int i = 0; i < batch; ++i) {
        for (int c = 0; c < obs; ++c) j(i, c) = s(i, c);
        for (int c = 0; c < act; ++c) j(i, obs + c) = actions(i, c);
      }
      return j;
    };

    {  // critic: mean squared TD regression
      const nn::Matrix q = critic.forward(joint(a), false);
      nn::Matrix dq(batch, 1);
      for (int i = 0; i < batch; ++i) dq(i, 0) = 2.0 * (q(i, 0) - y[i]) / batch;
      zero_grads(critic);
      critic.backward(dq);
      critic_tally.fold(oracle::fd_check(
          [&] {
            const nn::Matrix qq = critic.forward(joint(a), false);
            double l = 0.0;
            for (int i = 0; i < batch; ++i) l += (qq(i, 0) - y[i]) * (qq(i, 0) - y[i]) / batch;
            return l;
          },
          head_entries(critic), 1e-5, kFdTol));
    }
    {  // actor: ascend the critic through the joint input
      const nn::Matrix pi = actor.forward(s, false);
      critic.forward(joint(pi), false);
      nn::Matrix dq(batch, 1);
      for (int i = 0; i < batch; ++i) dq(i, 0) = -1.0 / batch;
      const nn::Matrix djoint = critic.backward(dq);
      nn::Matrix da(batch, act);
      for (int i = 0; i < batch; ++i)
        for (int c = 0; c < act; ++c) da(i, c) = djoint(i, obs + c);
      zero_grads(actor);
      actor.backward(da);
      actor_tally.fold(oracle::fd_check(
          [&] {
            const nn::Matrix pi2 = actor.forward(s, false);
            const nn::Matrix q = critic.forward(joint(pi2), false);
            double l = 0.0;
            for (int i = 0; i < batch; ++i) l -= q(i, 0) / batch;
            return l;
          },
          head_entries(actor), 1e-5, kFdTol));
    }
  }
  return {critic_tally, actor_tally};
}

bool check_gradients() {
  const auto report = [](const char* name, const FdTally& t) {
    say("%s: %d instances, %d failures, worst rel err %.3g", name, t.instances, t.failed,
        t.worst);
    return t.ok();
  };
  bool ok = true;
  ok &= report("mse", fd_mse());
  ok &= report("huber", fd_huber());
  ok &= report("categorical cross-entropy", fd_categorical_ce());
  ok &= report("quantile huber", fd_quantile_huber());
  ok &= report("ppo surrogate", fd_ppo_surrogate());
  const auto [critic, actor] = fd_ddpg();
  ok &= report("ddpg critic", critic);
  ok &= report("ddpg actor", actor);
  return ok;
}

// ---- check 5: distributed semantics ----------------------------------------

config::ConfigTree distributed_cfg(const std::string& extra_train) {
  auto cfg = shipped("dqn", "cartpole");
  for (const auto& [key, value] : nlohmann::json::parse(extra_train).items())
    cfg.apply_override("train", key, value.is_string() ? value.get<std::string>() : value.dump());
  return cfg;
}

bool check_sync_equivalence() {
  const auto cfg = distributed_cfg(
      R"({"run_step": 1000, "print_period": 1000, "eval_iteration": 1,
          "save_period": 1000000, "seed": 10, "num_workers": 1, "update_period": 1})");

  std::vector<SeenTransition> single_stream, sync_stream;
  run::RunOptions opts_single;
  opts_single.logs_root = scratch("dist/equiv_single");
  opts_single.transition_tap = capture_into(single_stream);
  run::run_single(cfg, opts_single);

  run::RunOptions opts_sync;
  opts_sync.logs_root = scratch("dist/equiv_sync");
  opts_sync.transition_tap = capture_into(sync_stream);
  run::run_sync(cfg, opts_sync);

  const bool same = single_stream.size() == static_cast<std::size_t>(kStreamSteps) &&
                    single_stream == sync_stream;
  say("sync(num_workers=1) vs single: %zu vs %zu transitions, element-wise %s",
      single_stream.size(), sync_stream.size(), same ? "identical" : "DIFFERENT");
  return same;
}

bool check_sync_conservation() {
  const auto cfg = distributed_cfg(
      R"({"run_step": 1280, "print_period": 100000, "eval_iteration": 1,
          "save_period": 1000000, "seed": 11, "num_workers": 8, "update_period": 32})");

  std::vector<std::size_t> sizes;
  std::mutex mu;
  run::RunOptions opts;
  opts.logs_root = scratch("dist/conservation");
  opts.batch_tap = [&](const run::TransitionBatchMsg& msg) {
    std::lock_guard lock(mu);
    sizes.push_back(msg.transitions.size());
  };
  const auto summary = run::run_sync(cfg, opts);

  bool ok = summary.rounds == 5 && summary.transitions_consumed == 256 * summary.rounds &&
            sizes.size() == static_cast<std::size_t>(8 * summary.rounds);
  long round_total = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    round_total += static_cast<long>(sizes[i]);
    if (i % 8 == 7) {
      ok = ok && round_total == 256;
      round_total = 0;
    }
  }
  say("sync(num_workers=8, update_period=32): %ld rounds x 256 = %ld transitions%s",
      summary.rounds, summary.transitions_consumed, ok ? "" : " (MISMATCH)");
  return ok;
}

bool check_async_liveness() {
  // calibrate the natural per-step latency of an actor on this machine
  const auto cfg_probe = shipped("dqn", "cartpole");
  auto probe_env = run::env_from_config(cfg_probe);
  auto probe_agent = agent::build_agent(cfg_probe, probe_env->spec());
  probe_agent->seed_streams(1, 0);
  auto obs = probe_env->reset(1);
  const auto t0 = steady_clock::now();
  constexpr int kProbeSteps = 4000;
  for (int i = 0; i < kProbeSteps; ++i) {
    const auto info = probe_agent->act(obs, i, true);
    const auto r = probe_env->step(info.action);
    obs = (r.done || r.truncated) ? probe_env->reset() : r.observation;
  }
  const auto natural_us =
      std::chrono::duration_cast<std::chrono::microseconds>(steady_clock::now() - t0).count() /
      kProbeSteps;
  const auto slow_by = std::chrono::microseconds(9 * std::max<std::int64_t>(natural_us, 1));

  const auto cfg = distributed_cfg(
      R"({"run_step": 100000000, "print_period": 100000000, "eval_iteration": 1,
          "save_period": 100000000, "seed": 5, "num_workers": 4, "update_period": 32,
          "async_window_ms": 100})");

  const auto run_for_30s = [&](bool slow_one, const char* tag) {
    run::RunOptions opts;
    opts.logs_root = scratch(std::string("dist/liveness_") + tag);
    opts.wall_clock_limit_ms = kLivenessSeconds * 1000;
    if (slow_one)
      opts.actor_hook = [slow_by](int actor_id, long) {
        if (actor_id == 0) std::this_thread::sleep_for(slow_by);
      };
    return run::run_async(cfg, opts).learner_updates;
  };

  const long healthy = run_for_30s(false, "healthy");
  const long degraded = run_for_30s(true, "degraded");
  const double ratio = healthy > 0 ? static_cast<double>(degraded) / healthy : 0.0;
  say("async liveness: healthy %ld updates, one actor 10x slowed (+%lldus/step) %ld updates, "
      "ratio %.2f (min %.2f)",
      healthy, static_cast<long long>(slow_by.count()), degraded, ratio, kLivenessRatio);
  return healthy > 0 && ratio >= kLivenessRatio;
}

bool check_distributed() {
  const bool a = check_sync_equivalence();
  const bool b = check_sync_conservation();
  const bool c = check_async_liveness();
  return a && b && c;
}

// ---- check 6: command line and config contract ------------------------------

bool check_cli_contract() {
  bool ok = true;

  // the three documented launch lines parse into the right dispatch
  {
    const auto one = cli::parse_args({"--config", "config.dqn.cartpole"});
    ok = ok && one.mode == run::RunMode::single && one.config_ref == "config.dqn.cartpole";
    const auto two = cli::parse_args(
        {"--sync", "--config", "config.ppo.cartpole", "--train.num_workers", "8"});
    ok = ok && two.mode == run::RunMode::sync && two.overrides.size() == 1 &&
         two.overrides[0].key == "num_workers";
    const auto three = cli::parse_args({"--eval", "--config", "config.dqn.cartpole",
                                        "--train.load_path", "some.ckpt"});
    ok = ok && three.mode == run::RunMode::eval;
    bool exclusive = false;
    try {
      cli::parse_args({"--sync", "--async"});
    } catch (const UsageError&) {
      exclusive = true;
    }
    ok = ok && exclusive;
    say("launch lines: single/sync/async dispatch %s, mode flags exclusive %s",
        ok ? "parsed" : "FAILED", exclusive ? "yes" : "NO");
  }

  // a num_workers override observably changes the actor pool (and line two
  // actually runs)
  fs::path first_run_dir;
  {
    auto opts = cli::parse_args(
        {"--sync", "--config", "config.ppo.cartpole", "--train.num_workers", "8"});
    opts.overrides.push_back({"train", "run_step", "256"});
    opts.overrides.push_back({"train", "update_period", "32"});
    opts.overrides.push_back({"train", "print_period", "100000"});
    opts.overrides.push_back({"train", "eval_iteration", "1"});
    std::set<int> actors;
    std::mutex mu;
    run::RunOptions run_opts;
    run_opts.logs_root = scratch("cli/sync8");
    run_opts.batch_tap = [&](const run::TransitionBatchMsg& msg) {
      std::lock_guard lock(mu);
      actors.insert(msg.actor_id);
    };
    cli::run_cli(opts, run_opts, kRepo);
    ok = ok && actors.size() == 8;
    say("--train.num_workers 8: %zu distinct actors fed the learner", actors.size());
  }

  // line one trains, line three evaluates its checkpoint without touching it
  {
    auto opts = cli::parse_args({"--config", "config.dqn.cartpole"});
    opts.overrides.push_back({"train", "run_step", "64"});
    opts.overrides.push_back({"train", "print_period", "64"});
    opts.overrides.push_back({"train", "eval_iteration", "1"});
    run::RunOptions run_opts;
    run_opts.logs_root = scratch("cli/single");
    const auto trained = cli::run_cli(opts, run_opts, kRepo);
    const auto ckpt = logging::RunDir{trained.run_dir}.checkpoint_file(64);
    ok = ok && fs::exists(ckpt);

    std::ifstream in(ckpt, std::ios::binary);
    std::ostringstream before;
    before << in.rdbuf();

    auto eval_opts = cli::parse_args({"--eval", "--config", "config.dqn.cartpole",
                                      "--train.load_path", ckpt.string()});
    eval_opts.overrides.push_back({"train", "eval_iteration", "2"});
    const auto evaluated = cli::run_cli(eval_opts, run_opts, kRepo);
    std::ifstream in2(ckpt, std::ios::binary);
    std::ostringstream after;
    after << in2.rdbuf();
    ok = ok && evaluated.evaluations.size() == 1 && evaluated.evaluations[0].step == 64 &&
         before.str() == after.str() && !before.str().empty();
    say("train -> eval round: one evaluation at the checkpoint step, checkpoint bytes intact");
  }

  // every shipped config builds its full component stack
  {
    int built = 0;
    for (const auto& entry : fs::recursive_directory_iterator(kRepo + "/config")) {
      if (entry.path().extension() != ".json") continue;
      const auto cfg = config::ConfigTree::load_file(entry.path().string());
      auto env = run::env_from_config(cfg);
      auto agent = agent::build_agent(cfg, env->spec());
      if (agent->name() != entry.path().parent_path().filename().string()) {
        say("config %s builds agent %s (unexpected)", entry.path().c_str(),
            agent->name().c_str());
        ok = false;
      }
      ++built;
    }
    ok = ok && built == 12;
    say("registry closure: %d shipped configs built end to end", built);
  }

  // run directories follow logs/[env]/[agent]/[timestamp]
  {
    auto cfg = config::ConfigTree::defaults();
    cfg.apply_override("train", "run_step", "8");
    cfg.apply_override("train", "print_period", "8");
    cfg.apply_override("train", "eval_iteration", "1");
    const logging::ManualClock clock(1637676604000);  // 2021-11-23 14:10:04 UTC
    run::RunOptions opts;
    opts.logs_root = scratch("cli/rundir");
    opts.clock = &clock;
    const auto summary = run::run_single(cfg, opts);
    const fs::path expected = scratch("cli/rundir") / "cartpole" / "dqn" / "20211123141004";
    ok = ok && summary.run_dir == expected && fs::exists(expected / "config.json") &&
         fs::exists(expected / "metrics.jsonl");
    say("run directory: %s", summary.run_dir.c_str());
  }

  return ok;
}

// ---- check 7: checkpoint round trips ----------------------------------------

bool check_checkpoint_round_trips() {
  bool ok = true;
  Rng noise(77);
  for (const auto& name : agent::agent_names()) {
    const auto env_name = name == "ddpg" ? std::string("pendulum") : std::string("cartpole");
    const auto cfg = config::ConfigTree::parse(
        R"({"env": {"name": ")" + env_name + R"("}, "agent": {"name": ")" + name +
            R"("}, "optim": {"lr": 0.001}, "train": {}})",
        "<round-trip>");
    auto env = env::build_env(env_name);
    auto a = agent::build_agent(cfg, env->spec());
    a->seed_streams(17, 0);

    // drift the parameters away from initialization so the round trip proves
    // actual state transfer
    auto params = a->export_params();
    for (auto& m : params)
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) += noise.uniform(-0.05, 0.05);
    a->import_params(params);

    logging::StateMap state;
    a->export_state(state);
    const auto path = scratch("roundtrip") / (name + ".ckpt");
    logging::SystemClock clock;
    logging::save_checkpoint(path, name, 1234, state, clock);

    auto b = agent::build_agent(cfg, env->spec());
    b->seed_streams(9999, 3);  // deliberately different before the load
    b->import_state(logging::load_checkpoint(path, name));

    Rng states(4242);
    int mismatches = 0;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> s(env->spec().obs_dim);
      for (auto& v : s) v = states.uniform(-1.0, 1.0);
      const auto act_a = a->act(s, 0, false).action;
      const auto act_b = b->act(s, 0, false).action;
      const bool same = act_a.kind == act_b.kind && act_a.index == act_b.index &&
                        act_a.values == act_b.values;
      if (!same) ++mismatches;
    }
    if (mismatches > 0) {
      say("%s: %d/100 greedy actions diverged after reload", name.c_str(), mismatches);
      ok = false;
    }
  }
  say("checkpoint round trip: greedy actions bit-identical for all %zu agents",
      agent::agent_names().size());
  return ok;
}

}  // namespace

int main() {
  struct Item {
    int number;
    const char* title;
    bool (*fn)();
  };
  // cheap structural checks first, long learning runs last
  const std::vector<Item> items = {
      {3, "oracle equivalence (tabular TD, projection mass, proportional sampling)",
       check_oracles},
      {4, "gradient correctness (finite differences on every loss)", check_gradients},
      {6, "command line and config contract", check_cli_contract},
      {7, "checkpoint round trips for every agent", check_checkpoint_round_trips},
      {5, "distributed semantics (equivalence, conservation, liveness)", check_distributed},
      {1, "cartpole learning across the value and policy agents", check_cartpole_learning},
      {2, "pendulum continuous control with ddpg", check_pendulum_learning},
  };

  std::map<int, std::pair<const char*, bool>> verdicts;
  for (const auto& item : items) {
    std::printf("[check %d] %s\n", item.number, item.title);
    std::fflush(stdout);
    bool ok = false;
    try {
      ok = item.fn();
    } catch (const std::exception& e) {
      say("unexpected exception: %s", e.what());
    }
    verdicts[item.number] = {item.title, ok};
  }

  std::printf("\n== results ==\n");
  int passed = 0;
  for (const auto& [number, verdict] : verdicts) {
    std::printf("criterion %d (%s): %s\n", number, verdict.first,
                verdict.second ? "PASS" : "FAIL");
    passed += verdict.second ? 1 : 0;
  }
  std::printf("== %d/%zu criteria passed ==\n", passed, verdicts.size());
  return passed == static_cast<int>(verdicts.size()) ? 0 : 1;
}
