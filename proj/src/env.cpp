#include "uavedge/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "uavedge/errors.hpp"

namespace uavedge {

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void require_positive(double value, const char* field) {
  require(std::isfinite(value) && value > 0.0, field, "must be finite and > 0");
}

void require_nonnegative(double value, const char* field) {
  require(std::isfinite(value) && value >= 0.0, field, "must be finite and >= 0");
}

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void SimConfig::validate() const {
  require(num_edges >= 1, "num_edges", "must be >= 1");
  require_positive(uav_capacity, "uav_capacity");
  require_positive(edge_capacity, "edge_capacity");
  require_positive(dist_min, "dist_min");
  require(std::isfinite(dist_max) && dist_min <= dist_max, "dist_max", "must be >= dist_min");
  require_positive(uav_data_rate, "uav_data_rate");
  require_positive(edge_clock, "edge_clock");
  require_positive(p_tx, "p_tx");
  require_positive(p_move, "p_move");
  require_positive(initial_energy, "initial_energy");
  require_nonnegative(in_min, "in_min");
  require(std::isfinite(in_max) && in_min <= in_max, "in_max", "must be >= in_min");
  require_nonnegative(out_min, "out_min");
  require(std::isfinite(out_max) && out_min <= out_max, "out_max", "must be >= out_min");
  require_nonnegative(alpha, "alpha");
  require_nonnegative(beta, "beta");
  require(alpha + beta <= 1.0, "alpha", "alpha + beta must be <= 1");
  require(max_steps >= 1, "max_steps", "must be >= 1");
  require_positive(dist_ref, "dist_ref");
  require_nonnegative(walk_step, "walk_step");
}

double transmission_time(double out_size, double distance, const SimConfig& config) {
  const double effective_rate = config.uav_data_rate / (1.0 + distance / config.dist_ref);
  return out_size / effective_rate;
}

double compute_delay(double out_size, double distance, double edge_backlog,
                     const SimConfig& config) {
  const double t_tx = transmission_time(out_size, distance, config);
  const double t_wait = edge_backlog / config.edge_clock;
  const double t_proc = out_size / config.edge_clock;
  return t_tx + t_wait + t_proc;
}

double compute_energy(double t_tx, const SimConfig& config) {
  return config.p_tx * t_tx + config.p_move;
}

RewardScales reward_scales(const SimConfig& config) {
  RewardScales s;
  s.delay_max = compute_delay(config.out_max, config.dist_max, config.edge_capacity, config);
  s.energy_max =
      compute_energy(transmission_time(config.out_max, config.dist_max, config), config);
  return s;
}

double combine_reward(const RewardComponents& c, double alpha, double beta) {
  return alpha * c.delay + beta * c.energy + (1.0 - (alpha + beta)) * c.overflow;
}

RewardBreakdown compute_reward(double delay, double energy, bool overflow,
                               const SimConfig& config) {
  return compute_reward(delay, energy, overflow, config, reward_scales(config));
}

RewardBreakdown compute_reward(double delay, double energy, bool overflow,
                               const SimConfig& config, const RewardScales& scales) {
  RewardBreakdown out;
  out.components.delay = 1.0 - clamp01(delay / scales.delay_max);
  out.components.energy = 1.0 - clamp01(energy / scales.energy_max);
  out.components.overflow = overflow ? -1.0 : 0.0;
  out.total = combine_reward(out.components, config.alpha, config.beta);
  return out;
}

Observation make_observation(const EnvState& state, const SimConfig& config) {
  Observation obs;
  obs.reserve(config.observation_dim());
  obs.push_back(clamp01(state.uav_backlog / config.uav_capacity));
  obs.push_back(clamp01(ratio_or_zero(state.in_size, config.in_max)));
  obs.push_back(clamp01(ratio_or_zero(state.out_size, config.out_max)));
  // Energy goes negative on the terminal step; the feature saturates at 0.
  obs.push_back(clamp01(state.uav_energy / config.initial_energy));
  const double span = config.dist_max - config.dist_min;
  for (const EdgeState& e : state.edges) {
    obs.push_back(clamp01((config.edge_capacity - e.backlog) / config.edge_capacity));
    obs.push_back(clamp01(ratio_or_zero(e.distance - config.dist_min, span)));
  }
  return obs;
}

Environment::Environment(SimConfig config, std::uint64_t seed)
    : config_(config), rng_(seed) {
  config_.validate();
  scales_ = reward_scales(config_);
}

void Environment::sample_sizes() {
  state_.in_size = rng_.uniform(config_.in_min, config_.in_max);
  state_.out_size = rng_.uniform(config_.out_min, config_.out_max);
}

Observation Environment::reset() {
  state_.uav_backlog = rng_.uniform(0.0, config_.uav_capacity);
  state_.uav_energy = config_.initial_energy;
  state_.step_index = 0;
  state_.edges.assign(config_.num_edges, EdgeState{});
  for (EdgeState& e : state_.edges) {
    e.backlog = rng_.uniform(0.0, config_.edge_capacity);
    e.distance = rng_.uniform(config_.dist_min, config_.dist_max);
  }
  sample_sizes();
  last_step_ = StepInfo{};
  started_ = true;
  done_ = false;
  return observe();
}

Observation Environment::observe() const { return make_observation(state_, config_); }

void Environment::set_state(EnvState state) {
  if (state.edges.size() != config_.num_edges) {
    throw ShapeError("set_state: expected " + std::to_string(config_.num_edges) +
                     " edges, got " + std::to_string(state.edges.size()));
  }
  state_ = std::move(state);
  started_ = true;
  done_ = state_.uav_energy <= 0.0 || state_.step_index >= config_.max_steps;
}

Transition Environment::step(std::size_t action) {
  if (!started_) throw std::logic_error("step: reset() must be called first");
  if (done_) throw std::logic_error("step: episode already terminated");
  if (action >= config_.num_edges) {
    throw std::out_of_range("step: action " + std::to_string(action) +
                            " outside [0, " + std::to_string(config_.num_edges) + ")");
  }

  Transition t;
  t.obs = observe();
  t.action = action;

  StepInfo info;
  info.delivered = std::min(state_.out_size, state_.uav_backlog + state_.in_size);

  EdgeState& target = state_.edges[action];
  info.edge_backlog_before = target.backlog;
  info.t_tx = transmission_time(info.delivered, target.distance, config_);
  info.delay = compute_delay(info.delivered, target.distance, target.backlog, config_);
  info.energy = compute_energy(info.t_tx, config_);

  const double free_space = config_.edge_capacity - target.backlog;
  if (info.delivered > free_space) {
    info.overflow = true;
    info.accepted = free_space;
    info.dropped = info.delivered - free_space;
    target.backlog = config_.edge_capacity;
  } else {
    info.accepted = info.delivered;
    target.backlog += info.delivered;
  }
  info.edge_backlog_after_delivery = target.backlog;

  for (EdgeState& e : state_.edges) e.backlog -= std::min(e.backlog, config_.edge_clock);

  state_.uav_backlog = std::clamp(state_.uav_backlog + state_.in_size - info.delivered, 0.0,
                                  config_.uav_capacity);
  state_.uav_energy -= info.energy;

  for (EdgeState& e : state_.edges) {
    const double moved = e.distance + rng_.uniform(-config_.walk_step, config_.walk_step);
    e.distance = std::clamp(moved, config_.dist_min, config_.dist_max);
  }
  sample_sizes();

  ++state_.step_index;
  done_ = state_.uav_energy <= 0.0 || state_.step_index >= config_.max_steps;

  const RewardBreakdown r = compute_reward(info.delay, info.energy, info.overflow, config_, scales_);
  t.reward = r.total;
  t.components = r.components;
  t.next_obs = observe();
  t.done = done_;
  last_step_ = info;
  return t;
}

}  // namespace uavedge
