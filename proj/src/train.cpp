#include "uavedge/train.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

#include "uavedge/errors.hpp"

namespace uavedge {

const char* to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::full:
      return "full";
    case RewardVariant::energy_overflow:
      return "energy_overflow";
  }
  return "full";
}

std::optional<RewardVariant> parse_reward_variant(std::string_view name) {
  if (name == "full") return RewardVariant::full;
  if (name == "energy_overflow") return RewardVariant::energy_overflow;
  return std::nullopt;
}

double variant_reward(RewardVariant variant, const RewardComponents& c, double alpha,
                      double beta) {
  if (variant == RewardVariant::full) return combine_reward(c, alpha, beta);
  // beta' = beta / (beta + (1 - alpha - beta)), delay weight dropped.
  const double energy_weight = beta / (1.0 - alpha);
  return energy_weight * c.energy + (1.0 - energy_weight) * c.overflow;
}

void TrainConfig::validate() const {
  if (total_episodes < 1) throw ConfigError("total_episodes", "must be >= 1");
  if (eval_every < 0) throw ConfigError("eval_every", "must be >= 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes", "must be >= 1");
  sim.validate();
  agent.validate();
  if (reward_variant == RewardVariant::energy_overflow && !(sim.alpha < 1.0)) {
    throw ConfigError("alpha", "energy_overflow variant needs alpha < 1");
  }
}

std::uint64_t evaluation_seed(std::uint64_t seed) { return derive_seed(seed, 3); }

TrainResult run_training(const TrainConfig& config, const TrainObserver* observer) {
  config.validate();

  Environment env(config.sim, derive_seed(config.seed, 1));
  DqnAgent agent(env.observation_dim(), env.num_edges(), config.agent, derive_seed(config.seed, 2));

  std::vector<EpisodeRecord> records;
  std::vector<EvalPoint> evals;
  records.reserve(static_cast<std::size_t>(config.total_episodes));

  for (int episode = 1; episode <= config.total_episodes; ++episode) {
    EpisodeRecord rec;
    rec.episode = episode;
    rec.epsilon = epsilon_at(agent.config(), episode - 1);

    double loss_sum = 0.0;
    int loss_count = 0;
    Observation obs = env.reset();
    while (!env.done()) {
      const std::size_t action = agent.select_action(obs, rec.epsilon);
      Transition t = env.step(action);
      t.reward = variant_reward(config.reward_variant, t.components, config.sim.alpha,
                                config.sim.beta);
      rec.total_reward += t.reward;
      rec.steps += 1;
      if (env.last_step().overflow) rec.overflow_count += 1;
      obs = t.next_obs;
      agent.remember(std::move(t));

      if (const std::optional<TrainStepStats> stats = agent.train_step()) {
        loss_sum += stats->loss;
        loss_count += 1;
        if (observer && observer->on_train_step) observer->on_train_step(*stats);
      }
    }
    rec.energy_used = config.sim.initial_energy - env.state().uav_energy;
    rec.mean_loss = loss_count > 0 ? loss_sum / loss_count
                                   : std::numeric_limits<double>::quiet_NaN();

    const bool synced = agent.end_episode();
    if (observer) {
      if (synced && observer->on_target_sync) observer->on_target_sync(episode);
      if (observer->on_agent_episode_end) observer->on_agent_episode_end(agent);
      if (observer->on_episode) observer->on_episode(rec);
    }
    records.push_back(rec);

    if (config.eval_every > 0 && episode % config.eval_every == 0) {
      evals.push_back({episode, evaluate(PolicyKind::dqn_checkpoint, config.sim,
                                         config.eval_episodes, evaluation_seed(config.seed),
                                         &agent.online())});
    }
  }
  return TrainResult{std::move(records), std::move(evals), agent.online()};
}

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::dqn_checkpoint:
      return "dqn-checkpoint";
    case PolicyKind::random:
      return "random";
    case PolicyKind::nearest_edge:
      return "nearest-edge";
    case PolicyKind::max_free_capacity:
      return "max-free-capacity";
  }
  return "random";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::dqn_checkpoint, PolicyKind::random, PolicyKind::nearest_edge,
                       PolicyKind::max_free_capacity}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

Policy make_policy(PolicyKind kind, const QNetwork* net, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::dqn_checkpoint:
      if (net == nullptr) throw std::invalid_argument("dqn-checkpoint policy needs a network");
      return [net](const Environment&, std::span<const double> obs) {
        return greedy_action(*net, obs);
      };
    case PolicyKind::random: {
      auto rng = std::make_shared<Rng>(seed);
      return [rng](const Environment& env, std::span<const double>) {
        return rng->index(env.num_edges());
      };
    }
    case PolicyKind::nearest_edge:
      return [](const Environment& env, std::span<const double>) {
        const auto& edges = env.state().edges;
        std::size_t best = 0;
        for (std::size_t e = 1; e < edges.size(); ++e) {
          if (edges[e].distance < edges[best].distance) best = e;
        }
        return best;
      };
    case PolicyKind::max_free_capacity:
      return [](const Environment& env, std::span<const double>) {
        const auto& edges = env.state().edges;
        std::size_t best = 0;
        for (std::size_t e = 1; e < edges.size(); ++e) {
          if (edges[e].backlog < edges[best].backlog) best = e;
        }
        return best;
      };
  }
  throw std::invalid_argument("unknown policy kind");
}

EvalSummary evaluate(PolicyKind kind, const SimConfig& sim, int episodes, std::uint64_t seed,
                     const QNetwork* net) {
  if (episodes < 1) throw ConfigError("episodes", "must be >= 1");
  Environment env(sim, seed);
  if (kind == PolicyKind::dqn_checkpoint && net != nullptr &&
      (net->input_dim() != env.observation_dim() || net->output_dim() != env.num_edges())) {
    throw ShapeError("checkpoint expects " + std::to_string(net->input_dim()) + " inputs and " +
                     std::to_string(net->output_dim()) + " actions; environment has " +
                     std::to_string(env.observation_dim()) + " features and " +
                     std::to_string(env.num_edges()) + " edges");
  }
  const Policy policy = make_policy(kind, net, derive_seed(seed, 1));

  std::vector<double> totals;
  double rate_sum = 0.0;
  double length_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Observation obs = env.reset();
    double total = 0.0;
    int steps = 0;
    int overflows = 0;
    while (!env.done()) {
      const Transition t = env.step(policy(env, obs));
      total += t.reward;
      ++steps;
      if (env.last_step().overflow) ++overflows;
      obs = t.next_obs;
    }
    totals.push_back(total);
    rate_sum += static_cast<double>(overflows) / steps;
    length_sum += steps;
  }

  EvalSummary s;
  s.episodes = episodes;
  double sum = 0.0;
  for (double v : totals) sum += v;
  s.mean_reward = sum / episodes;
  if (episodes > 1) {
    double ss = 0.0;
    for (double v : totals) ss += (v - s.mean_reward) * (v - s.mean_reward);
    s.stdev_reward = std::sqrt(ss / (episodes - 1));
  }
  s.overflow_rate = rate_sum / episodes;
  s.mean_length = length_sum / episodes;
  return s;
}

VariantComparison compare_variants(const TrainConfig& config) {
  TrainConfig full_cfg = config;
  full_cfg.reward_variant = RewardVariant::full;
  TrainConfig eo_cfg = config;
  eo_cfg.reward_variant = RewardVariant::energy_overflow;
  full_cfg.validate();
  eo_cfg.validate();

  // Independent jobs: each owns its environment, agent and PRNG streams.
  auto eo_job = std::async(std::launch::async, [&eo_cfg] { return run_training(eo_cfg); });
  TrainResult full = run_training(full_cfg);
  TrainResult energy_overflow = eo_job.get();

  const std::uint64_t eval_seed = evaluation_seed(config.seed);
  EvalSummary full_eval = evaluate(PolicyKind::dqn_checkpoint, config.sim, config.eval_episodes,
                                   eval_seed, &full.network);
  EvalSummary eo_eval = evaluate(PolicyKind::dqn_checkpoint, config.sim, config.eval_episodes,
                                 eval_seed, &energy_overflow.network);
  return VariantComparison{std::move(full), std::move(energy_overflow), full_eval, eo_eval};
}

}  // namespace uavedge
