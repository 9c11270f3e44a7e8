#include "gdnlab/learn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "grad_check.hpp"

using namespace gdnlab;

namespace {

GdnModel tiny_model(LayerKind kind, int obs_dim, int n_actions, bool value_head, Rng& rng) {
  ModelConfig c;
  c.kind = kind;
  c.rounds = 2;
  c.hidden = 5;
  c.obs_dim = obs_dim;
  c.n_actions = n_actions;
  c.value_head = value_head;
  c.qk_dim = 3;
  c.value_dim = 4;
  return make_gdn_model(c, rng);
}

Experience constant_experience(double reward, int action, int n_actions) {
  Experience e;
  e.obs = Mat(1, 2, 0.5);
  e.next_obs = Mat(1, 2, 0.5);
  e.actions = {action};
  e.rewards = {reward};
  e.comm = {{0}};
  e.next_comm = {{0}};
  e.active = {1};
  e.next_active = {1};
  e.terminal = true;
  (void)n_actions;
  return e;
}

}  // namespace

TEST(Learn, ReturnsToGo) {
  const auto returns = returns_to_go({{1.0}, {2.0}, {3.0}}, 1.0);
  EXPECT_DOUBLE_EQ(returns[0][0], 6.0);
  EXPECT_DOUBLE_EQ(returns[1][0], 5.0);
  EXPECT_DOUBLE_EQ(returns[2][0], 3.0);

  const auto discounted = returns_to_go({{1.0}, {1.0}, {1.0}}, 0.5);
  EXPECT_DOUBLE_EQ(discounted[0][0], 1.75);
}

TEST(Learn, EpsilonSchedule) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(epsilon_for(0, cfg), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_for(45000, cfg), 0.1);  // 1 - 45000 * 2e-5 exactly
  EXPECT_DOUBLE_EQ(epsilon_for(1000000, cfg), 0.1);
  EXPECT_THROW(epsilon_for(-1, cfg), std::invalid_argument);
  // non-increasing
  double prev = 2.0;
  for (long long e = 0; e < 100000; e += 1000) {
    const double eps = epsilon_for(e, cfg);
    EXPECT_LE(eps, prev);
    EXPECT_GE(eps, cfg.epsilon_min);
    EXPECT_LE(eps, cfg.epsilon_start);
    prev = eps;
  }
}

TEST(Learn, ReplayBufferEvictsOldestFirst) {
  ReplayBuffer buffer(3);
  for (int i = 0; i < 5; ++i) {
    Experience e = constant_experience(static_cast<double>(i), 0, 2);
    buffer.add(std::move(e));
  }
  EXPECT_EQ(buffer.size(), 3);
  EXPECT_DOUBLE_EQ(buffer.at(0).rewards[0], 2.0);  // oldest surviving
  EXPECT_DOUBLE_EQ(buffer.at(2).rewards[0], 4.0);
}

TEST(Learn, ReplaySamplingWithoutReplacementAndReproducible) {
  ReplayBuffer buffer(10);
  for (int i = 0; i < 10; ++i) buffer.add(constant_experience(i, 0, 2));
  Rng rng1(3), rng2(3);
  const auto a = buffer.sample(6, rng1);
  const auto b = buffer.sample(6, rng2);
  std::set<const Experience*> unique(a.begin(), a.end());
  EXPECT_EQ(unique.size(), 6u);
  EXPECT_EQ(a, b);
  EXPECT_THROW(buffer.sample(11, rng1), std::invalid_argument);
}

TEST(Learn, GradientsMatchFiniteDifferencesAllKinds) {
  const LayerKind kinds[] = {LayerKind::kMeanAgg, LayerKind::kSumAgg, LayerKind::kAttention,
                             LayerKind::kGatedMean, LayerKind::kGatedAttention};
  Rng rng(11);
  for (LayerKind kind : kinds) {
    for (int trial = 0; trial < 3; ++trial) {
      GdnModel model = tiny_model(kind, 3, 3, true, rng);
      const AttributedGraph comm = random_graph(4, 0.5, 0, 1, rng);
      const Mat obs = uniform_init(4, 3, 1.0, rng);

      auto build = [&](Tape& tape) {
        const ForwardNodes nodes = forward_on_tape(tape, model, comm, tape.input(obs));
        Tape::Id logp = tape.log_softmax_rows(nodes.outputs);
        Tape::Id picked = tape.pick(logp, {{0, 1}, {1, 0}, {2, 2}, {3, 1}});
        return tape.add(tape.sum_all(picked), tape.sum_all(nodes.value));
      };
      model.params.zero_grads();
      {
        Tape tape;
        tape.backward(build(tape));
      }
      auto eval = [&]() {
        Tape tape;
        return tape.value(build(tape))(0, 0);
      };
      EXPECT_LT(oracle::finite_difference_error(model.params, eval), 1e-4)
          << layer_kind_name(kind);
    }
  }
}

TEST(Learn, RecurrentGradientsMatchFiniteDifferences) {
  Rng rng(13);
  ModelConfig c;
  c.kind = LayerKind::kMeanAgg;
  c.rounds = 2;
  c.hidden = 4;
  c.obs_dim = 2;
  c.n_actions = 2;
  c.recurrent = true;
  GdnModel model = make_gdn_model(c, rng);
  const AttributedGraph comm = make_cycle(3);
  const Mat obs0 = uniform_init(3, 2, 1.0, rng);
  const Mat obs1 = uniform_init(3, 2, 1.0, rng);

  // two chained steps: gradients flow through the carried hidden state
  auto build = [&](Tape& tape) {
    const ForwardNodes first = forward_on_tape(tape, model, comm, tape.input(obs0));
    const ForwardNodes second =
        forward_on_tape(tape, model, comm, tape.input(obs1), first.hidden);
    return tape.sum_all(tape.log_softmax_rows(second.outputs));
  };
  model.params.zero_grads();
  {
    Tape tape;
    tape.backward(build(tape));
  }
  auto eval = [&]() {
    Tape tape;
    return tape.value(build(tape))(0, 0);
  };
  EXPECT_LT(oracle::finite_difference_error(model.params, eval), 1e-4);
}

TEST(Learn, A2cLossTermsMatchManualComputation) {
  Rng rng(17);
  GdnModel model = tiny_model(LayerKind::kMeanAgg, 2, 3, true, rng);
  EpisodeData episode;
  episode.obs = {Mat(2, 2, 0.3)};
  episode.comms = {make_complete(2)};
  episode.actions = {{1, 2}};
  episode.rewards = {{1.0, -1.0}};
  episode.active = {{1, 1}};

  const ForwardResult out = forward(model, episode.comms[0], episode.obs[0]);
  double expected_policy = 0.0, expected_value = 0.0;
  TrainConfig cfg;
  for (int i = 0; i < 2; ++i) {
    double mx = out.outputs(i, 0);
    for (int a = 1; a < 3; ++a) mx = std::max(mx, out.outputs(i, a));
    double z = 0.0;
    for (int a = 0; a < 3; ++a) z += std::exp(out.outputs(i, a) - mx);
    const double logp = out.outputs(i, episode.actions[0][i]) - mx - std::log(z);
    const double ret = episode.rewards[0][i];
    const double adv = ret - out.value(i, 0);
    expected_policy += -logp * adv;
    expected_value += cfg.value_coeff * (out.value(i, 0) - ret) * (out.value(i, 0) - ret);
  }

  const A2cStats stats = a2c_update(model, {episode}, cfg);
  EXPECT_NEAR(stats.policy_loss, expected_policy, 1e-9);
  EXPECT_NEAR(stats.value_loss, expected_value, 1e-9);
  EXPECT_EQ(stats.steps, 1);
}

TEST(Learn, A2cUpdateIsReproducible) {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    GdnModel model = tiny_model(LayerKind::kGatedMean, 2, 2, true, rng);
    EpisodeData episode;
    episode.obs = {uniform_init(3, 2, 1.0, rng), uniform_init(3, 2, 1.0, rng)};
    episode.comms = {make_cycle(3), make_cycle(3)};
    episode.actions = {{0, 1, 0}, {1, 1, 0}};
    episode.rewards = {{1, 0, 0.5}, {0, 0, 1}};
    episode.active = {{1, 1, 1}, {1, 1, 1}};
    TrainConfig cfg;
    a2c_update(model, {episode}, cfg);
    return model;
  };
  const GdnModel a = run(99), b = run(99);
  for (int i = 0; i < a.params.count(); ++i) EXPECT_EQ(a.params.value(i), b.params.value(i));
}

TEST(Learn, A2cRejectsEmptyBatch) {
  Rng rng(1);
  GdnModel model = tiny_model(LayerKind::kMeanAgg, 2, 2, true, rng);
  TrainConfig cfg;
  EXPECT_THROW(a2c_update(model, {}, cfg), std::invalid_argument);
}

TEST(Learn, BanditConverges) {
  // one-step bandit, reward 1 for action 0 only: the sampled policy must
  // concentrate on action 0
  Rng rng(23);
  GdnModel model = tiny_model(LayerKind::kMeanAgg, 1, 2, true, rng);
  const AttributedGraph comm = make_edgeless(1);
  const Mat obs = Mat(1, 1, 1.0);
  TrainConfig cfg;
  cfg.lrate = 0.05;
  Rng actions(31);
  for (int update = 0; update < 200; ++update) {
    std::vector<EpisodeData> batch;
    for (int e = 0; e < 10; ++e) {
      const ForwardResult out = forward(model, comm, obs);
      const double logit0 = out.outputs(0, 0), logit1 = out.outputs(0, 1);
      const double p0 = 1.0 / (1.0 + std::exp(logit1 - logit0));
      const int action = actions.uniform() < p0 ? 0 : 1;
      EpisodeData ep;
      ep.obs = {obs};
      ep.comms = {comm};
      ep.actions = {{action}};
      ep.rewards = {{action == 0 ? 1.0 : 0.0}};
      ep.active = {{1}};
      batch.push_back(std::move(ep));
    }
    a2c_update(model, batch, cfg);
  }
  const ForwardResult out = forward(model, comm, obs);
  const double p0 = 1.0 / (1.0 + std::exp(out.outputs(0, 1) - out.outputs(0, 0)));
  EXPECT_GT(p0, 0.9);
}

TEST(Learn, DqnTargetFormula) {
  // Q == 2 everywhere via zeroed weights and bias 2; reward 1 and gamma 1
  // give y = 3 and per-sample loss (2-3)^2 = 1
  Rng rng(29);
  GdnModel model = tiny_model(LayerKind::kAttention, 2, 2, false, rng);
  for (int i = 0; i < model.params.count(); ++i) model.params.value(i).fill(0.0);
  model.params.value(model.head_b) = Mat(1, 2, 2.0);
  GdnModel target = model;

  TrainConfig cfg;
  cfg.dgn_batch_size = 4;
  cfg.lrate = 0.0;  // inspect the loss without moving parameters
  ReplayBuffer buffer(10);
  for (int i = 0; i < 4; ++i) {
    Experience e = constant_experience(1.0, 0, 2);
    e.terminal = false;
    buffer.add(std::move(e));
  }
  Rng sample_rng(7);
  const auto stats = dqn_update(model, target, buffer, cfg, sample_rng);
  ASSERT_TRUE(stats.has_value());
  EXPECT_NEAR(stats->loss, 1.0, 1e-9);

  // Q == y => loss 0 (reward 0, so y = 0 + 1 * 2 = 2)
  ReplayBuffer buffer2(10);
  for (int i = 0; i < 4; ++i) {
    Experience e = constant_experience(0.0, 0, 2);
    e.terminal = false;
    buffer2.add(std::move(e));
  }
  const auto stats2 = dqn_update(model, target, buffer2, cfg, sample_rng);
  ASSERT_TRUE(stats2.has_value());
  EXPECT_NEAR(stats2->loss, 0.0, 1e-12);
}

TEST(Learn, DqnSkipsUnderfilledBuffer) {
  Rng rng(31);
  GdnModel model = tiny_model(LayerKind::kAttention, 2, 2, false, rng);
  GdnModel target = model;
  TrainConfig cfg;
  ReplayBuffer buffer(1000);
  buffer.add(constant_experience(1.0, 0, 2));
  EXPECT_FALSE(dqn_update(model, target, buffer, cfg, rng).has_value());
}

TEST(Learn, DqnSyntheticRegressionLossDropsTenfold) {
  Rng rng(37);
  GdnModel model = tiny_model(LayerKind::kAttention, 2, 2, false, rng);
  GdnModel target = model;
  TrainConfig cfg;
  cfg.dgn_batch_size = 8;
  cfg.lrate = 0.1;
  ReplayBuffer buffer(64);
  Rng gen(5);
  for (int i = 0; i < 8; ++i) {
    Experience e;
    e.obs = uniform_init(2, 2, 1.0, gen);
    e.next_obs = e.obs;
    e.actions = {gen.uniform_int(2), gen.uniform_int(2)};
    e.rewards = {5.0 + gen.uniform(-0.5, 0.5), 5.0 + gen.uniform(-0.5, 0.5)};
    e.comm = {{0, 1}, {1, 0}};
    e.next_comm = e.comm;
    e.active = {1, 1};
    e.next_active = {1, 1};
    e.terminal = true;  // fixed regression targets
    buffer.add(std::move(e));
  }
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 100; ++step) {
    Rng sample_rng(11);  // same batch every time
    const auto stats = dqn_update(model, target, buffer, cfg, sample_rng);
    ASSERT_TRUE(stats.has_value());
    if (step == 0) first = stats->loss;
    last = stats->loss;
  }
  EXPECT_LT(last * 10.0, first);
}

TEST(Learn, ImitationInterleavingCounts) {
  TrainConfig cfg;
  cfg.num_normal_experiences = 5;
  cfg.num_imitation_experiences = 2;
  ReplayBuffer buffer(100);
  int expert_count = 0, normal_count = 0;
  imitation_interleave(
      buffer, [&]() { ++expert_count; return constant_experience(1.0, 0, 2); },
      [&]() { ++normal_count; return constant_experience(0.0, 0, 2); }, 3, cfg);
  EXPECT_EQ(normal_count, 15);
  EXPECT_EQ(expert_count, 6);
  EXPECT_EQ(buffer.size(), 21);
  // stream order: 5 normal then 2 expert per cycle
  for (int cycle = 0; cycle < 3; ++cycle) {
    for (int i = 0; i < 5; ++i)
      EXPECT_DOUBLE_EQ(buffer.at(cycle * 7 + i).rewards[0], 0.0);
    for (int i = 5; i < 7; ++i)
      EXPECT_DOUBLE_EQ(buffer.at(cycle * 7 + i).rewards[0], 1.0);
  }
}

TEST(Learn, TrainConfigValidation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.lrate = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.epsilon_min = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
