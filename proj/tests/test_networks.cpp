#include <doctest.h>

#include <cmath>

#include "relab/error.hpp"
#include "relab/net/noisy.hpp"
#include "relab/net/registry.hpp"
#include "relab/nn/losses.hpp"
#include "support/oracles.hpp"

using namespace relab;
using nn::Matrix;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

net::NetworkSpec base_spec() {
  net::NetworkSpec spec;
  spec.in_dim = 4;
  spec.n_actions = 2;
  spec.hidden = {16, 16};
  return spec;
}

void fd_check_head(net::Head& head, const Matrix& x, const Matrix& target) {
  const auto loss = [&] { return nn::mse_loss(head.forward(x, true), target).value; };
  for (auto* p : head.parameters()) p->zero_grad();
  const auto res = nn::mse_loss(head.forward(x, true), target);
  head.backward(res.grad);

  std::vector<std::pair<double*, double>> entries;
  for (auto* p : head.parameters())
    for (int i = 0; i < p->value.size(); ++i)
      entries.emplace_back(p->value.data() + i, p->grad.data()[i]);

  const auto check = oracle::fd_check(loss, entries);
  CHECK(check.checked > 50);
  CHECK(check.failed == 0);
  CHECK(check.worst < 1e-4);
}

}  // namespace

TEST_CASE("registry: every listed network builds and produces its shape") {
  Rng rng(1);
  const Matrix x = random_matrix(3, 4, rng);
  for (const auto& name : net::network_names()) {
    net::NetworkSpec spec = base_spec();
    spec.n_atoms = 5;
    if (name == "deterministic_policy_network") {
      spec.out_dim = 1;
      spec.action_low = {-2.0};
      spec.action_high = {2.0};
    }
    auto head = net::build_network(name, spec);
    head->init(rng);
    head->resample_noise(rng);
    const Matrix y = head->forward(x, true);
    CHECK(y.rows() == 3);
    CHECK(y.cols() == head->out_dim());
    if (name == "categorical_q_network" || name == "noisy_dueling_categorical_q_network" ||
        name == "quantile_q_network") {
      CHECK(head->out_dim() == 2 * 5);
    } else if (name == "discrete_policy_value_network") {
      CHECK(head->out_dim() == 3);  // two logits plus a value column
    } else if (name == "state_action_q_network" ||
               name == "deterministic_policy_network") {
      CHECK(head->out_dim() == 1);
    } else {
      CHECK(head->out_dim() == 2);
    }
  }
}

TEST_CASE("registry: unknown name lists the available networks") {
  try {
    net::build_network("conv_q_network", base_spec());
    FAIL("expected LookupError");
  } catch (const LookupError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("conv_q_network") != std::string::npos);
    CHECK(msg.find("discrete_q_network") != std::string::npos);
  }
}

TEST_CASE("dueling combine: pinned values and identifiability") {
  const Matrix v = Matrix::from({{1.0}});
  const Matrix adv = Matrix::from({{1.0, 2.0, 3.0}});
  const Matrix q = net::dueling_combine(v, adv, 3, 1);
  CHECK(q(0, 0) == doctest::Approx(0.0));
  CHECK(q(0, 1) == doctest::Approx(1.0));
  CHECK(q(0, 2) == doctest::Approx(2.0));

  // adding a constant to every advantage leaves Q unchanged
  Matrix shifted = adv;
  for (int a = 0; a < 3; ++a) shifted(0, a) += 7.5;
  const Matrix q2 = net::dueling_combine(v, shifted, 3, 1);
  for (int a = 0; a < 3; ++a) CHECK(q2(0, a) == doctest::Approx(q(0, a)));

  // uniform advantages collapse to the value stream
  const Matrix q3 = net::dueling_combine(v, Matrix(1, 3, 4.0), 3, 1);
  for (int a = 0; a < 3; ++a) CHECK(q3(0, a) == doctest::Approx(1.0));

  CHECK_THROWS_AS(net::dueling_combine(v, adv, 2, 1), DimensionError);
}

TEST_CASE("dueling combine: per-atom aggregation keeps blocks independent") {
  Rng rng(9);
  const int actions = 3, atoms = 4;
  const Matrix v = random_matrix(2, atoms, rng);
  const Matrix adv = random_matrix(2, actions * atoms, rng);
  const Matrix q = net::dueling_combine(v, adv, actions, atoms);
  for (int b = 0; b < 2; ++b)
    for (int z = 0; z < atoms; ++z) {
      double mean = 0.0;
      for (int a = 0; a < actions; ++a) mean += adv(b, a * atoms + z);
      mean /= actions;
      for (int a = 0; a < actions; ++a)
        CHECK(q(b, a * atoms + z) ==
              doctest::Approx(v(b, z) + adv(b, a * atoms + z) - mean));
    }
}

TEST_CASE("heads: analytic gradients match finite differences") {
  Rng rng(23);
  SUBCASE("dueling head") {
    net::NetworkSpec spec = base_spec();
    spec.hidden_act = nn::Activation::tanh;
    spec.n_atoms = 1;
    net::DuelingHead head(spec);
    head.init(rng);
    fd_check_head(head, random_matrix(4, 4, rng), random_matrix(4, 2, rng));
  }
  SUBCASE("noisy head with frozen noise") {
    net::NetworkSpec spec = base_spec();
    spec.hidden_act = nn::Activation::tanh;
    spec.out_dim = 2;
    net::NoisyMlpHead head(spec);
    head.init(rng);
    head.resample_noise(rng);
    fd_check_head(head, random_matrix(4, 4, rng), random_matrix(4, 2, rng));
  }
  SUBCASE("noisy dueling head with atoms") {
    net::NetworkSpec spec = base_spec();
    spec.hidden_act = nn::Activation::tanh;
    spec.n_atoms = 3;
    net::NoisyDuelingHead head(spec);
    head.init(rng);
    head.resample_noise(rng);
    fd_check_head(head, random_matrix(2, 4, rng), random_matrix(2, 6, rng));
  }
  SUBCASE("policy value head") {
    net::NetworkSpec spec = base_spec();
    spec.hidden_act = nn::Activation::tanh;
    net::PolicyValueHead head(spec);
    head.init(rng);
    fd_check_head(head, random_matrix(4, 4, rng), random_matrix(4, 3, rng));
  }
  SUBCASE("deterministic actor head") {
    net::NetworkSpec spec = base_spec();
    spec.hidden_act = nn::Activation::tanh;
    spec.out_dim = 2;
    spec.action_low = {-2.0, -1.0};
    spec.action_high = {2.0, 3.0};
    net::DeterministicActorHead head(spec);
    head.init(rng);
    fd_check_head(head, random_matrix(4, 4, rng), random_matrix(4, 2, rng));
  }
}

TEST_CASE("noisy linear: evaluation uses the means exactly") {
  net::NoisyLinear layer(3, 2, 0.5);
  Rng rng(7);
  layer.init(rng);
  layer.resample(rng);

  const Matrix x = Matrix::from({{0.3, -0.7, 1.1}});
  const Matrix eval1 = layer.forward(x, false);
  layer.resample(rng);
  const Matrix eval2 = layer.forward(x, false);
  CHECK(eval1 == eval2);  // resampling cannot leak into evaluation

  // manual mu computation
  Matrix expected(1, 2);
  for (int j = 0; j < 2; ++j) {
    double acc = layer.parameters()[2]->value(0, j);
    for (int i = 0; i < 3; ++i) acc += x(0, i) * layer.parameters()[0]->value(i, j);
    expected(0, j) = acc;
  }
  CHECK(eval1(0, 0) == doctest::Approx(expected(0, 0)));
  CHECK(eval1(0, 1) == doctest::Approx(expected(0, 1)));

  const Matrix noisy1 = layer.forward(x, true);
  layer.resample(rng);
  const Matrix noisy2 = layer.forward(x, true);
  CHECK(noisy1(0, 0) != noisy2(0, 0));  // fresh noise shifts the output
}

TEST_CASE("noisy linear: sigma initialization scale") {
  net::NoisyLinear layer(16, 4, 0.5);
  Rng rng(3);
  layer.init(rng);
  const double expected = 0.5 / std::sqrt(16.0);
  CHECK(layer.parameters()[1]->value(0, 0) == doctest::Approx(expected));
  CHECK(layer.parameters()[3]->value(0, 2) == doctest::Approx(expected));
}

TEST_CASE("noisy linear: output variance matches the factorized-noise formula") {
  // Var(y_j) = (2/pi) sum_i sigma_ij^2 x_i^2 + sqrt(2/pi) sigma_b_j^2
  net::NoisyLinear layer(3, 2, 0.5);
  Rng rng(11);
  layer.init(rng);
  auto params = layer.parameters();
  params[1]->value = Matrix::from({{0.4, 0.1}, {0.2, 0.3}, {0.1, 0.2}});
  params[3]->value = Matrix::from({{0.25, 0.15}});

  const Matrix x = Matrix::from({{0.8, -0.5, 1.2}});
  const int n = 60000;
  std::vector<double> sum(2, 0.0), sum_sq(2, 0.0);
  for (int k = 0; k < n; ++k) {
    layer.resample(rng);
    const Matrix y = layer.forward(x, true);
    for (int j = 0; j < 2; ++j) {
      sum[j] += y(0, j);
      sum_sq[j] += y(0, j) * y(0, j);
    }
  }
  const double two_over_pi = 2.0 / 3.141592653589793;
  for (int j = 0; j < 2; ++j) {
    const double mean = sum[j] / n;
    const double var = sum_sq[j] / n - mean * mean;
    double expected = std::sqrt(two_over_pi) * params[3]->value(0, j) * params[3]->value(0, j);
    for (int i = 0; i < 3; ++i)
      expected += two_over_pi * params[1]->value(i, j) * params[1]->value(i, j) * x(0, i) * x(0, i);
    CHECK(std::abs(var - expected) / expected < 0.05);
  }
}

TEST_CASE("categorical probs: valid distribution per action block") {
  Rng rng(5);
  const Matrix logits = random_matrix(3, 2 * 7, rng, -4.0, 4.0);
  const Matrix probs = net::categorical_probs(logits, 2, 7);
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      for (int z = 0; z < 7; ++z) {
        const double p = probs(b, a * 7 + z);
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

  // shifting one block's logits by a constant leaves its probabilities alone
  Matrix shifted = logits;
  for (int z = 0; z < 7; ++z) shifted(1, 7 + z) += 123.0;
  const Matrix probs2 = net::categorical_probs(shifted, 2, 7);
  for (int z = 0; z < 7; ++z) CHECK(probs2(1, 7 + z) == doctest::Approx(probs(1, 7 + z)));

  CHECK_THROWS_AS(net::categorical_probs(logits, 3, 7), DimensionError);
}

TEST_CASE("quantile taus are interval midpoints") {
  const auto taus = net::quantile_taus(51);
  CHECK(taus.size() == 51);
  CHECK(taus.front() == doctest::Approx(1.0 / 102.0));
  CHECK(taus[25] == doctest::Approx(0.5));
  CHECK(taus.back() == doctest::Approx(101.0 / 102.0));
  for (std::size_t i = 1; i < taus.size(); ++i) CHECK(taus[i] > taus[i - 1]);
  CHECK_THROWS_AS(net::quantile_taus(0), ParameterError);
}

TEST_CASE("categorical support: linspace and validation") {
  const net::CategoricalSupport sup(-10.0, 10.0, 51);
  CHECK(sup.atoms.size() == 51);
  CHECK(sup.atoms.front() == -10.0);
  CHECK(sup.atoms.back() == 10.0);
  CHECK(sup.delta == doctest::Approx(0.4));
  for (int i = 1; i < 51; ++i) CHECK(sup.atoms[i] > sup.atoms[i - 1]);

  CHECK_THROWS_AS(net::CategoricalSupport(5.0, 5.0, 51), ParameterError);
  CHECK_THROWS_AS(net::CategoricalSupport(-1.0, 1.0, 1), ParameterError);
}

TEST_CASE("clone: deep copy that stops tracking the original") {
  Rng rng(31);
  net::NetworkSpec spec = base_spec();
  auto head = net::build_network("discrete_q_network", spec);
  head->init(rng);
  const Matrix x = random_matrix(2, 4, rng);
  auto copy = head->clone();
  CHECK(copy->forward(x, false) == head->forward(x, false));

  head->parameters()[0]->value(0, 0) += 1.0;
  CHECK(!(copy->forward(x, false) == head->forward(x, false)));
}
