#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "tabular_mdp.hpp"
#include "uavedge/agent.hpp"
#include "uavedge/errors.hpp"
#include "uavedge/replay.hpp"

using namespace uavedge;

namespace {

Transition tagged(double tag) {
  Transition t;
  t.obs = {tag};
  t.next_obs = {tag};
  t.reward = tag;
  return t;
}

// Single identity layer: Q(s) = W s + b. With W = 0 the Q values equal the bias.
AgentConfig linear_config() {
  AgentConfig cfg;
  cfg.hidden = {};
  return cfg;
}

void set_constant_q(QNetwork& net, const std::vector<double>& q) {
  std::fill(net.mutable_params()[0].weights.begin(), net.mutable_params()[0].weights.end(), 0.0);
  net.mutable_params()[0].bias = q;
}

}  // namespace

TEST(ReplayBuffer, EvictsOldestAtCapacity) {
  ReplayBuffer buf(50000);
  for (int i = 1; i <= 50000; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.size(), 50000u);
  EXPECT_EQ(buf.evictions(), 0u);
  EXPECT_EQ(buf.at(0).reward, 1.0);
  buf.push(tagged(50001));
  EXPECT_EQ(buf.size(), 50000u);
  EXPECT_EQ(buf.evictions(), 1u);
  EXPECT_EQ(buf.total_pushed(), 50001u);
  EXPECT_EQ(buf.at(0).reward, 2.0);
  EXPECT_EQ(buf.at(49999).reward, 50001.0);
  bool first_present = false;
  for (std::size_t i = 0; i < buf.size(); ++i) first_present = first_present || buf.at(i).reward == 1.0;
  EXPECT_FALSE(first_present);
}

TEST(ReplayBuffer, FifoOrderAfterWrapAround) {
  ReplayBuffer buf(3);
  for (int i = 1; i <= 7; ++i) buf.push(tagged(i));
  EXPECT_EQ(buf.at(0).reward, 5.0);
  EXPECT_EQ(buf.at(1).reward, 6.0);
  EXPECT_EQ(buf.at(2).reward, 7.0);
  EXPECT_EQ(buf.evictions(), 4u);
  EXPECT_THROW(buf.at(3), std::out_of_range);
}

TEST(ReplayBuffer, SampleFromSingleRecordRepeatsIt) {
  ReplayBuffer buf(10);
  buf.push(tagged(7));
  Rng rng(1);
  const std::vector<Transition> batch = buf.sample(64, rng);
  ASSERT_EQ(batch.size(), 64u);
  for (const Transition& t : batch) EXPECT_EQ(t.reward, 7.0);
}

TEST(ReplayBuffer, SamplingIsUniform) {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) buf.push(tagged(i));
  Rng rng(2024);
  std::vector<int> counts(100, 0);
  for (int round = 0; round < 1000; ++round)
    for (const Transition& t : buf.sample(100, rng)) counts[static_cast<std::size_t>(t.reward)]++;
  for (int c : counts) {
    EXPECT_GT(c, 800);
    EXPECT_LT(c, 1200);
  }
}

TEST(ReplayBuffer, EmptySampleThrows) {
  ReplayBuffer buf(4);
  Rng rng(1);
  EXPECT_THROW(buf.sample(1, rng), std::logic_error);
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(Epsilon, LinearDecayThenFlat) {
  AgentConfig cfg;
  EXPECT_DOUBLE_EQ(epsilon_at(cfg, 0), 1.0);
  EXPECT_NEAR(epsilon_at(cfg, 1250), 0.525, 1e-12);
  EXPECT_NEAR(epsilon_at(cfg, 2500), 0.05, 1e-12);
  EXPECT_NEAR(epsilon_at(cfg, 3000), 0.05, 1e-12);
  double prev = 2.0;
  for (int e = 0; e <= 2600; e += 50) {
    const double eps = epsilon_at(cfg, e);
    EXPECT_LE(eps, prev);
    EXPECT_GE(eps, 0.05 - 1e-15);
    prev = eps;
  }
}

TEST(AgentConfig, Validation) {
  AgentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto expect_field = [](AgentConfig c, const std::string& field) {
    try {
      c.validate();
      ADD_FAILURE() << "expected error on " << field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field);
    }
  };
  AgentConfig c = cfg;
  c.gamma = 1.5;
  expect_field(c, "gamma");
  c = cfg;
  c.batch_size = 0;
  expect_field(c, "batch_size");
  c = cfg;
  c.target_update_every = 0;
  expect_field(c, "target_update_every");
  c = cfg;
  c.epsilon_end = 1.5;
  expect_field(c, "epsilon_end");
  c = cfg;
  c.replay_capacity = 0;
  expect_field(c, "replay_capacity");
  c = cfg;
  c.adam.learning_rate = 0.0;
  expect_field(c, "learning_rate");
}

TEST(ArgmaxAction, LowestIndexWinsTies) {
  EXPECT_EQ(argmax_action(std::vector<double>{1.0, 3.0, 2.0}), 1u);
  EXPECT_EQ(argmax_action(std::vector<double>{5.0, 5.0, 5.0}), 0u);
  EXPECT_EQ(argmax_action(std::vector<double>{-1.0, 2.0, 2.0}), 1u);
}

TEST(SelectAction, GreedyPicksArgmax) {
  DqnAgent agent(3, 4, linear_config(), 1);
  set_constant_q(agent.mutable_online(), {0.1, 0.9, 0.3, 0.2});
  const std::vector<double> obs = {0.5, 0.5, 0.5};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(agent.select_action(obs, 0.0), 1u);
  set_constant_q(agent.mutable_online(), {0.4, 0.4, 0.4, 0.4});
  EXPECT_EQ(agent.select_action(obs, 0.0), 0u);
}

TEST(SelectAction, FullExplorationIsUniform) {
  DqnAgent agent(3, 10, linear_config(), 99);
  set_constant_q(agent.mutable_online(), {0, 0, 0, 0, 0, 0, 0, 0, 0, 9});
  const std::vector<double> obs = {0.1, 0.2, 0.3};
  std::vector<int> counts(10, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) counts[agent.select_action(obs, 1.0)]++;
  double chi2 = 0.0;
  const double expected = n / 10.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 0.99 quantile of chi-square with 9 degrees of freedom.
  EXPECT_LT(chi2, 21.666);
}

TEST(SelectAction, MixedEpsilonExploresAtExpectedRate) {
  DqnAgent agent(3, 10, linear_config(), 7);
  set_constant_q(agent.mutable_online(), {0, 0, 0, 0, 0, 0, 0, 0, 0, 9});
  const std::vector<double> obs = {0.1, 0.2, 0.3};
  int greedy = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) greedy += agent.select_action(obs, 0.3) == 9 ? 1 : 0;
  // P(action 9) = 0.7 + 0.3 / 10 = 0.73
  EXPECT_NEAR(static_cast<double>(greedy) / n, 0.73, 0.02);
}

TEST(TdTargets, TerminalAndBootstrapped) {
  std::vector<LayerParams> params(1);
  params[0].weights = {0, 0, 0, 0};
  params[0].bias = {1.5, 0.5};
  const QNetwork target({{2, 2, Activation::identity}}, params);

  Transition terminal;
  terminal.obs = {0, 0};
  terminal.next_obs = {0, 0};
  terminal.reward = -1.0 / 3.0;
  terminal.done = true;
  Transition live = terminal;
  live.reward = 1.0;
  live.done = false;

  const std::vector<Transition> batch = {terminal, live};
  const std::vector<double> y = td_targets(batch, target, 0.99);
  EXPECT_DOUBLE_EQ(y[0], -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0 + 0.99 * 1.5);
  EXPECT_NEAR(y[1], 2.485, 1e-12);

  const std::vector<double> y0 = td_targets(batch, target, 0.0);
  EXPECT_EQ(y0[0], -1.0 / 3.0);
  EXPECT_EQ(y0[1], 1.0);
}

TEST(TrainStep, WaitsForLearnStart) {
  AgentConfig cfg;
  cfg.batch_size = 8;
  cfg.learn_start = 8;
  const std::vector<LayerParams> before = DqnAgent(2, 2, cfg, 1).online().params();
  Transition t;
  t.obs = {0.1, 0.2};
  t.next_obs = {0.2, 0.3};
  for (int i = 0; i < 7; ++i) {
    DqnAgent fresh(2, 2, cfg, 1);
    for (int j = 0; j <= i; ++j) fresh.remember(t);
    EXPECT_FALSE(fresh.train_step().has_value());
    EXPECT_EQ(fresh.online().params(), before);
  }
  DqnAgent ready(2, 2, cfg, 1);
  for (int j = 0; j < 8; ++j) ready.remember(t);
  const auto stats = ready.train_step();
  ASSERT_TRUE(stats.has_value());
  EXPECT_EQ(stats->batch_size, 8u);
  EXPECT_EQ(stats->gamma, 0.99);
  EXPECT_NE(ready.online().params(), before);
}

TEST(TrainStep, FixedPointHasZeroLossAndNoUpdate) {
  // Terminal transitions with reward equal to the current Q(s, a): zero TD error.
  AgentConfig cfg = linear_config();
  cfg.batch_size = 4;
  cfg.learn_start = 4;
  DqnAgent agent(2, 3, cfg, 5);
  set_constant_q(agent.mutable_online(), {0.25, -0.5, 1.0});
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t a = i % 3;
    Transition t;
    t.obs = {0.3, 0.7};
    t.next_obs = {0.0, 0.0};
    t.action = a;
    t.reward = agent.online().params()[0].bias[a];
    t.done = true;
    agent.remember(t);
  }
  const std::vector<LayerParams> before = agent.online().params();
  for (int i = 0; i < 5; ++i) {
    const auto stats = agent.train_step();
    ASSERT_TRUE(stats.has_value());
    EXPECT_EQ(stats->loss, 0.0);
  }
  EXPECT_EQ(agent.online().params(), before);
}

TEST(TrainStep, RegressesToConstantTarget) {
  AgentConfig cfg;
  cfg.batch_size = 16;
  cfg.learn_start = 16;
  cfg.hidden = {16};
  cfg.adam.learning_rate = 1e-2;
  DqnAgent agent(2, 2, cfg, 11);
  for (int i = 0; i < 32; ++i) {
    Transition t;
    t.obs = {0.5, 0.25};
    t.next_obs = t.obs;
    t.action = 1;
    t.reward = 0.8;
    t.done = true;
    agent.remember(t);
  }
  int steps = 0;
  double q = 0.0;
  for (; steps < 2000; ++steps) {
    agent.train_step();
    q = agent.online().predict(std::vector<double>{0.5, 0.25})[1];
    if (std::fabs(q - 0.8) < 0.01) break;
  }
  EXPECT_LT(std::fabs(q - 0.8), 0.01);
  EXPECT_LT(steps, 2000);
}

TEST(TrainStep, RejectsOutOfRangeAction) {
  AgentConfig cfg;
  cfg.batch_size = 1;
  cfg.learn_start = 1;
  DqnAgent agent(2, 2, cfg, 1);
  Transition t;
  t.obs = {0, 0};
  t.next_obs = {0, 0};
  t.action = 5;
  agent.remember(t);
  EXPECT_THROW(agent.train_step(), ShapeError);
}

TEST(TargetSync, EveryNthEpisode) {
  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.learn_start = 4;
  DqnAgent agent(2, 2, cfg, 3);
  EXPECT_EQ(agent.target().params(), agent.online().params());
  Transition t;
  t.obs = {0.2, 0.4};
  t.next_obs = {0.4, 0.2};
  t.reward = 1.0;
  for (int i = 0; i < 4; ++i) agent.remember(t);

  std::vector<int> synced_at;
  for (int episode = 1; episode <= 12; ++episode) {
    ASSERT_TRUE(agent.train_step().has_value());
    EXPECT_NE(agent.target().params(), agent.online().params());
    if (agent.end_episode()) {
      synced_at.push_back(episode);
      EXPECT_EQ(agent.target().params(), agent.online().params());
    }
  }
  EXPECT_EQ(synced_at, (std::vector<int>{5, 10}));
  EXPECT_EQ(agent.sync_count(), 2);
  EXPECT_EQ(agent.episodes_completed(), 12);
}

TEST(TargetSync, TargetFrozenBetweenSyncs) {
  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.learn_start = 4;
  DqnAgent agent(2, 2, cfg, 4);
  Transition t;
  t.obs = {0.2, 0.4};
  t.next_obs = {0.4, 0.2};
  t.reward = 1.0;
  for (int i = 0; i < 4; ++i) agent.remember(t);
  const std::vector<LayerParams> frozen = agent.target().params();
  for (int i = 0; i < 50; ++i) agent.train_step();
  EXPECT_EQ(agent.target().params(), frozen);
  agent.sync_target();
  EXPECT_EQ(agent.target().params(), agent.online().params());
}

TEST(Agent, SameSeedSameBehaviour) {
  AgentConfig cfg;
  cfg.batch_size = 8;
  cfg.learn_start = 8;
  auto run = [&cfg](std::uint64_t seed) {
    DqnAgent agent(3, 4, cfg, seed);
    Rng env_rng(17);
    std::vector<std::size_t> actions;
    for (int i = 0; i < 200; ++i) {
      std::vector<double> obs = {env_rng.uniform01(), env_rng.uniform01(), env_rng.uniform01()};
      const std::size_t a = agent.select_action(obs, 0.3);
      actions.push_back(a);
      Transition t;
      t.obs = obs;
      t.action = a;
      t.reward = env_rng.uniform01();
      t.next_obs = {env_rng.uniform01(), env_rng.uniform01(), env_rng.uniform01()};
      agent.remember(t);
      agent.train_step();
    }
    return std::make_pair(actions, agent.online().params());
  };
  EXPECT_EQ(run(5), run(5));
  EXPECT_NE(run(5).second, run(6).second);
}

TEST(TabularOracle, ValueIterationReference) {
  const oracles::QTable q = oracles::value_iteration(0.9);
  EXPECT_NEAR(q[0][0], 0.9, 1e-12);
  EXPECT_NEAR(q[0][1], 0.729, 1e-12);
  EXPECT_NEAR(q[1][0], 1.0, 1e-12);
  EXPECT_NEAR(q[1][1], 0.729, 1e-12);
  EXPECT_NEAR(q[2][0], 0.5, 1e-12);
  EXPECT_NEAR(q[2][1], 0.81, 1e-12);
}

TEST(TabularOracle, DqnRecoversOptimalQ) {
  const oracles::QTable expected = oracles::value_iteration(0.9);
  const oracles::TabularRun run = oracles::train_on_tabular_mdp(5000, 1);
  double max_err = 0.0;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      EXPECT_TRUE(run.visited[s][a]);
      max_err = std::max(max_err, std::fabs(run.learned[s][a] - expected[s][a]));
    }
    EXPECT_EQ(argmax_action(run.learned[s]), argmax_action(expected[s])) << "state " << s;
  }
  EXPECT_LT(max_err, 0.05);
}
