#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uavedge/rng.hpp"

namespace uavedge {

// Environment constants. Data volumes are in GB, distances in metres, rates
// in GB per time step, energy in abstract battery units.
struct SimConfig {
  std::size_t num_edges = 10;
  double uav_capacity = 250.0;
  double edge_capacity = 1500.0;
  double dist_min = 1.0;
  double dist_max = 15.0;
  double uav_data_rate = 0.9;
  double edge_clock = 2.7;
  double p_tx = 0.4 / 0.7;
  double p_move = 0.6 / 0.7;
  double initial_energy = 100.0;
  double in_min = 0.5;
  double in_max = 2.0;
  double out_min = 0.5;
  double out_max = 2.0;
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  int max_steps = 500;
  double dist_ref = 10.0;
  double walk_step = 1.0;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  std::size_t observation_dim() const { return 4 + 2 * num_edges; }
};

struct EdgeState {
  double backlog = 0.0;
  double distance = 0.0;
};

struct EnvState {
  double uav_backlog = 0.0;
  double uav_energy = 0.0;
  int step_index = 0;
  std::vector<EdgeState> edges;
  // Data sizes sampled for the upcoming step; part of the observation.
  double in_size = 0.0;
  double out_size = 0.0;
};

using Observation = std::vector<double>;

// Normalized reward terms: delay and energy in [0, 1], overflow in {-1, 0}.
struct RewardComponents {
  double delay = 0.0;
  double energy = 0.0;
  double overflow = 0.0;
};

struct Transition {
  Observation obs;
  std::size_t action = 0;
  double reward = 0.0;
  RewardComponents components;
  Observation next_obs;
  bool done = false;
};

// Raw physical quantities of the most recent step.
struct StepInfo {
  double delivered = 0.0;  // GB sent from the UAV to the selected edge
  double accepted = 0.0;   // GB that fit into the edge queue
  double dropped = 0.0;    // delivered - accepted
  bool overflow = false;
  double t_tx = 0.0;
  double delay = 0.0;
  double energy = 0.0;
  double edge_backlog_before = 0.0;
  double edge_backlog_after_delivery = 0.0;
};

// Worst-case delay and energy for a config; used to normalize reward terms.
struct RewardScales {
  double delay_max = 1.0;
  double energy_max = 1.0;
};

double transmission_time(double out_size, double distance, const SimConfig& config);

// t_tx + queue wait + processing time, in time steps.
double compute_delay(double out_size, double distance, double edge_backlog,
                     const SimConfig& config);

// Transmission power for t_tx plus one full step of movement.
double compute_energy(double t_tx, const SimConfig& config);

RewardScales reward_scales(const SimConfig& config);

double combine_reward(const RewardComponents& c, double alpha, double beta);

struct RewardBreakdown {
  double total = 0.0;
  RewardComponents components;
};

RewardBreakdown compute_reward(double delay, double energy, bool overflow,
                               const SimConfig& config);
RewardBreakdown compute_reward(double delay, double energy, bool overflow,
                               const SimConfig& config, const RewardScales& scales);

class Environment {
 public:
  Environment(SimConfig config, std::uint64_t seed);

  Observation reset();
  Transition step(std::size_t action);

  Observation observe() const;
  bool done() const noexcept { return done_; }
  bool started() const noexcept { return started_; }
  std::size_t num_edges() const noexcept { return config_.num_edges; }
  std::size_t observation_dim() const noexcept { return config_.observation_dim(); }

  const SimConfig& config() const noexcept { return config_; }
  const EnvState& state() const noexcept { return state_; }
  const StepInfo& last_step() const noexcept { return last_step_; }
  const RewardScales& scales() const noexcept { return scales_; }

  // Overwrites the live state (scripted scenarios). The state must match the
  // config's edge count; the episode is marked started and re-evaluated for
  // termination.
  void set_state(EnvState state);

 private:
  void sample_sizes();

  SimConfig config_;
  RewardScales scales_;
  Rng rng_;
  EnvState state_;
  StepInfo last_step_;
  bool started_ = false;
  bool done_ = false;
};

Observation make_observation(const EnvState& state, const SimConfig& config);

}  // namespace uavedge
