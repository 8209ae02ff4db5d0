#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavedge/agent.hpp"
#include "uavedge/env.hpp"
#include "uavedge/nn.hpp"

namespace uavedge {

// full: delay + energy + overflow weighted by (alpha, beta, 1 - alpha - beta).
// energy_overflow: delay term removed, remaining weights renormalized.
enum class RewardVariant { full, energy_overflow };

const char* to_string(RewardVariant v);
std::optional<RewardVariant> parse_reward_variant(std::string_view name);

double variant_reward(RewardVariant variant, const RewardComponents& c, double alpha,
                      double beta);

struct TrainConfig {
  int total_episodes = 5000;
  std::uint64_t seed = 1;
  RewardVariant reward_variant = RewardVariant::full;
  int eval_every = 100;  // 0 disables periodic evaluation
  int eval_episodes = 20;
  SimConfig sim;
  AgentConfig agent;

  void validate() const;
};

struct EpisodeRecord {
  int episode = 0;  // 1-based
  double total_reward = 0.0;
  int steps = 0;
  int overflow_count = 0;
  double energy_used = 0.0;
  double epsilon = 0.0;
  double mean_loss = 0.0;  // NaN when no train step ran during the episode
};

struct EvalSummary {
  int episodes = 0;
  double mean_reward = 0.0;
  double stdev_reward = 0.0;
  double overflow_rate = 0.0;  // overflows per step, averaged over episodes
  double mean_length = 0.0;
};

struct EvalPoint {
  int episode = 0;
  EvalSummary summary;
};

struct TrainResult {
  std::vector<EpisodeRecord> episodes;
  std::vector<EvalPoint> evals;
  QNetwork network;
};

// Optional instrumentation callbacks for run_training.
struct TrainObserver {
  std::function<void(int episode)> on_target_sync;
  std::function<void(const TrainStepStats&)> on_train_step;
  std::function<void(const EpisodeRecord&)> on_episode;
  std::function<void(const DqnAgent&)> on_agent_episode_end;
};

TrainResult run_training(const TrainConfig& config, const TrainObserver* observer = nullptr);

enum class PolicyKind { dqn_checkpoint, random, nearest_edge, max_free_capacity };

const char* to_string(PolicyKind k);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

// Maps the live environment (and its observation) to an edge index.
using Policy = std::function<std::size_t(const Environment&, std::span<const double>)>;

// `net` is required for dqn_checkpoint and ignored otherwise. `seed` feeds the
// random policy's own PRNG.
Policy make_policy(PolicyKind kind, const QNetwork* net, std::uint64_t seed);

// Greedy rollouts scored with the full reward. Throws ShapeError when a
// checkpoint does not fit the environment.
EvalSummary evaluate(PolicyKind kind, const SimConfig& sim, int episodes, std::uint64_t seed,
                     const QNetwork* net = nullptr);

struct VariantComparison {
  TrainResult full;
  TrainResult energy_overflow;
  EvalSummary full_eval;
  EvalSummary energy_overflow_eval;
};

// Trains both reward variants with the same seed and evaluates each final
// policy under the full reward.
VariantComparison compare_variants(const TrainConfig& config);

// Seed used for the evaluation environment of a run with this seed.
std::uint64_t evaluation_seed(std::uint64_t seed);

}  // namespace uavedge
