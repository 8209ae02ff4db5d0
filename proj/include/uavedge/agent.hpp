#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uavedge/env.hpp"
#include "uavedge/nn.hpp"
#include "uavedge/replay.hpp"
#include "uavedge/rng.hpp"

namespace uavedge {

struct AgentConfig {
  double gamma = 0.99;
  std::size_t batch_size = 64;
  int target_update_every = 5;  // episodes
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 2500;
  std::size_t learn_start = 64;
  std::size_t replay_capacity = 50000;
  std::vector<std::size_t> hidden = {64, 64};
  AdamParams adam;

  void validate() const;
};

// Linear decay from epsilon_start to epsilon_end over epsilon_decay_episodes,
// then flat. `episode` counts completed episodes (0 for the first one).
double epsilon_at(const AgentConfig& config, int episode);

// argmax over Q; the lowest index wins ties.
std::size_t argmax_action(std::span<const double> q);

std::size_t greedy_action(const QNetwork& net, std::span<const double> obs);

// y_i = r_i for terminal transitions, else r_i + gamma * max_a Q_target(s'_i, a).
std::vector<double> td_targets(std::span<const Transition> batch, const QNetwork& target,
                               double gamma);

struct TrainStepStats {
  double loss = 0.0;
  std::size_t batch_size = 0;
  double gamma = 0.0;
};

class DqnAgent {
 public:
  DqnAgent(std::size_t obs_dim, std::size_t num_actions, AgentConfig config, std::uint64_t seed);

  // Epsilon-greedy: uniform random action with probability epsilon, else greedy.
  std::size_t select_action(std::span<const double> obs, double epsilon);

  void remember(Transition t) { replay_.push(std::move(t)); }

  // One minibatch MSE/Adam update on the online network. Returns nullopt
  // (and leaves parameters untouched) while the replay holds fewer than
  // learn_start records.
  std::optional<TrainStepStats> train_step();

  void sync_target();

  // Marks an episode finished; syncs the target network every
  // target_update_every episodes. Returns true when a sync happened.
  bool end_episode();

  const AgentConfig& config() const noexcept { return config_; }
  const QNetwork& online() const noexcept { return online_; }
  QNetwork& mutable_online() noexcept { return online_; }
  const QNetwork& target() const noexcept { return target_; }
  const ReplayBuffer& replay() const noexcept { return replay_; }
  int episodes_completed() const noexcept { return episodes_completed_; }
  int sync_count() const noexcept { return sync_count_; }

 private:
  AgentConfig config_;
  std::size_t num_actions_;
  QNetwork online_;
  QNetwork target_;
  ReplayBuffer replay_;
  Rng rng_;
  int episodes_completed_ = 0;
  int sync_count_ = 0;
};

}  // namespace uavedge
