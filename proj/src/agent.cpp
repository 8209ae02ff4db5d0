#include "uavedge/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "uavedge/errors.hpp"

namespace uavedge {

void AgentConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* message) {
    if (!ok) throw ConfigError(field, message);
  };
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0, "gamma", "must be in [0, 1]");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(target_update_every >= 1, "target_update_every", "must be >= 1");
  require(std::isfinite(epsilon_start) && epsilon_start <= 1.0, "epsilon_start",
          "must be <= 1");
  require(std::isfinite(epsilon_end) && epsilon_end >= 0.0, "epsilon_end", "must be >= 0");
  require(epsilon_end <= epsilon_start, "epsilon_end", "must be <= epsilon_start");
  require(epsilon_decay_episodes >= 1, "epsilon_decay_episodes", "must be >= 1");
  require(learn_start >= 1, "learn_start", "must be >= 1");
  require(replay_capacity >= 1, "replay_capacity", "must be >= 1");
  for (std::size_t h : hidden) require(h >= 1, "hidden", "layer widths must be >= 1");
  require(std::isfinite(adam.learning_rate) && adam.learning_rate > 0.0, "learning_rate",
          "must be > 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "adam_beta1", "must be in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "adam_beta2", "must be in [0, 1)");
  require(adam.epsilon > 0.0, "adam_epsilon", "must be > 0");
}

double epsilon_at(const AgentConfig& config, int episode) {
  const double progress =
      static_cast<double>(std::max(episode, 0)) / static_cast<double>(config.epsilon_decay_episodes);
  const double eps =
      config.epsilon_start - (config.epsilon_start - config.epsilon_end) * progress;
  return std::max(config.epsilon_end, eps);
}

std::size_t argmax_action(std::span<const double> q) {
  if (q.empty()) throw ShapeError("argmax over empty Q vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

std::size_t greedy_action(const QNetwork& net, std::span<const double> obs) {
  return argmax_action(net.predict(obs));
}

std::vector<double> td_targets(std::span<const Transition> batch, const QNetwork& target,
                               double gamma) {
  if (batch.empty()) throw std::invalid_argument("td_targets: empty batch");
  Matrix next(batch.size(), target.input_dim());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].next_obs.size() != target.input_dim()) {
      throw ShapeError("td_targets: next_obs length mismatch");
    }
    std::copy(batch[i].next_obs.begin(), batch[i].next_obs.end(), next.row(i));
  }
  const ForwardCache cache = target.forward(next);
  const Matrix& q = cache.output();

  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].done) {
      y[i] = batch[i].reward;
    } else {
      const double* row = q.row(i);
      y[i] = batch[i].reward + gamma * *std::max_element(row, row + q.cols);
    }
  }
  return y;
}

DqnAgent::DqnAgent(std::size_t obs_dim, std::size_t num_actions, AgentConfig config,
                   std::uint64_t seed)
    : config_((config.validate(), std::move(config))),
      num_actions_(num_actions),
      online_(mlp_specs(obs_dim, config_.hidden, num_actions), derive_seed(seed, 0)),
      target_(online_),
      replay_(config_.replay_capacity),
      rng_(derive_seed(seed, 1)) {}

std::size_t DqnAgent::select_action(std::span<const double> obs, double epsilon) {
  if (obs.size() != online_.input_dim()) {
    throw ShapeError("select_action: observation has " + std::to_string(obs.size()) +
                     " features, expected " + std::to_string(online_.input_dim()));
  }
  if (rng_.uniform01() < epsilon) return rng_.index(num_actions_);
  return greedy_action(online_, obs);
}

std::optional<TrainStepStats> DqnAgent::train_step() {
  if (replay_.size() < config_.learn_start) return std::nullopt;

  const std::vector<Transition> batch = replay_.sample(config_.batch_size, rng_);
  const std::vector<double> y = td_targets(batch, target_, config_.gamma);

  Matrix obs(batch.size(), online_.input_dim());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].obs.size() != online_.input_dim()) throw ShapeError("train_step: obs length mismatch");
    if (batch[i].action >= num_actions_) throw ShapeError("train_step: action out of range");
    std::copy(batch[i].obs.begin(), batch[i].obs.end(), obs.row(i));
  }
  const ForwardCache cache = online_.forward(obs);
  const Matrix& q = cache.output();

  // Loss = mean_i (Q(s_i, a_i) - y_i)^2; only the taken action's output gets a gradient.
  Matrix d_q(batch.size(), q.cols);
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double err = q(i, batch[i].action) - y[i];
    loss += err * err;
    d_q(i, batch[i].action) = 2.0 * err / n;
  }
  loss /= n;

  online_.adam_step(online_.backward(cache, d_q), config_.adam);
  return TrainStepStats{loss, batch.size(), config_.gamma};
}

void DqnAgent::sync_target() {
  target_.copy_parameters_from(online_);
  ++sync_count_;
}

bool DqnAgent::end_episode() {
  ++episodes_completed_;
  if (episodes_completed_ % config_.target_update_every == 0) {
    sync_target();
    return true;
  }
  return false;
}

}  // namespace uavedge
