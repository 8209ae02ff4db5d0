#include "uavedge/config_io.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "uavedge/errors.hpp"

namespace uavedge {

namespace {

using nlohmann::json;
using Setter = std::function<void(TrainConfig&, const json&, const std::string& path)>;

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long long>();
}

std::size_t as_count(const json& v, const std::string& path) {
  const long long n = as_integer(v, path);
  if (n < 0) throw ConfigError(path, "must be >= 0");
  return static_cast<std::size_t>(n);
}

int as_int(const json& v, const std::string& path) {
  const long long n = as_integer(v, path);
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    throw ConfigError(path, "out of range");
  }
  return static_cast<int>(n);
}

#define NUMBER_FIELD(section, member)                                   \
  {#member, [](TrainConfig& c, const json& v, const std::string& p) {  \
     c.section.member = as_number(v, p);                                \
   }}

const std::map<std::string, Setter>& sim_fields() {
  static const std::map<std::string, Setter> fields = {
      {"num_edges",
       [](TrainConfig& c, const json& v, const std::string& p) { c.sim.num_edges = as_count(v, p); }},
      {"max_steps",
       [](TrainConfig& c, const json& v, const std::string& p) { c.sim.max_steps = as_int(v, p); }},
      NUMBER_FIELD(sim, uav_capacity),
      NUMBER_FIELD(sim, edge_capacity),
      NUMBER_FIELD(sim, dist_min),
      NUMBER_FIELD(sim, dist_max),
      NUMBER_FIELD(sim, uav_data_rate),
      NUMBER_FIELD(sim, edge_clock),
      NUMBER_FIELD(sim, p_tx),
      NUMBER_FIELD(sim, p_move),
      NUMBER_FIELD(sim, initial_energy),
      NUMBER_FIELD(sim, in_min),
      NUMBER_FIELD(sim, in_max),
      NUMBER_FIELD(sim, out_min),
      NUMBER_FIELD(sim, out_max),
      NUMBER_FIELD(sim, alpha),
      NUMBER_FIELD(sim, beta),
      NUMBER_FIELD(sim, dist_ref),
      NUMBER_FIELD(sim, walk_step),
  };
  return fields;
}

const std::map<std::string, Setter>& agent_fields() {
  static const std::map<std::string, Setter> fields = {
      NUMBER_FIELD(agent, gamma),
      NUMBER_FIELD(agent, epsilon_start),
      NUMBER_FIELD(agent, epsilon_end),
      {"batch_size",
       [](TrainConfig& c, const json& v, const std::string& p) { c.agent.batch_size = as_count(v, p); }},
      {"target_update_every",
       [](TrainConfig& c, const json& v, const std::string& p) {
         c.agent.target_update_every = as_int(v, p);
       }},
      {"epsilon_decay_episodes",
       [](TrainConfig& c, const json& v, const std::string& p) {
         c.agent.epsilon_decay_episodes = as_int(v, p);
       }},
      {"learn_start",
       [](TrainConfig& c, const json& v, const std::string& p) { c.agent.learn_start = as_count(v, p); }},
      {"replay_capacity",
       [](TrainConfig& c, const json& v, const std::string& p) {
         c.agent.replay_capacity = as_count(v, p);
       }},
      {"hidden",
       [](TrainConfig& c, const json& v, const std::string& p) {
         if (!v.is_array()) throw ConfigError(p, "expected an array of layer widths");
         c.agent.hidden.clear();
         for (std::size_t i = 0; i < v.size(); ++i) {
           c.agent.hidden.push_back(as_count(v[i], p + "[" + std::to_string(i) + "]"));
         }
       }},
      {"learning_rate",
       [](TrainConfig& c, const json& v, const std::string& p) {
         c.agent.adam.learning_rate = as_number(v, p);
       }},
      {"adam_beta1",
       [](TrainConfig& c, const json& v, const std::string& p) { c.agent.adam.beta1 = as_number(v, p); }},
      {"adam_beta2",
       [](TrainConfig& c, const json& v, const std::string& p) { c.agent.adam.beta2 = as_number(v, p); }},
      {"adam_epsilon",
       [](TrainConfig& c, const json& v, const std::string& p) { c.agent.adam.epsilon = as_number(v, p); }},
  };
  return fields;
}

const std::map<std::string, Setter>& train_fields() {
  static const std::map<std::string, Setter> fields = {
      {"total_episodes",
       [](TrainConfig& c, const json& v, const std::string& p) { c.total_episodes = as_int(v, p); }},
      {"seed",
       [](TrainConfig& c, const json& v, const std::string& p) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
           throw ConfigError(p, "expected a non-negative integer");
         }
         c.seed = v.get<std::uint64_t>();
       }},
      {"reward_variant",
       [](TrainConfig& c, const json& v, const std::string& p) {
         if (!v.is_string()) throw ConfigError(p, "expected \"full\" or \"energy_overflow\"");
         const auto variant = parse_reward_variant(v.get<std::string>());
         if (!variant) throw ConfigError(p, "expected \"full\" or \"energy_overflow\"");
         c.reward_variant = *variant;
       }},
      {"eval_every",
       [](TrainConfig& c, const json& v, const std::string& p) { c.eval_every = as_int(v, p); }},
      {"eval_episodes",
       [](TrainConfig& c, const json& v, const std::string& p) { c.eval_episodes = as_int(v, p); }},
  };
  return fields;
}

#undef NUMBER_FIELD

void apply_section(TrainConfig& config, const json& doc, const std::string& section,
                   const std::map<std::string, Setter>& fields) {
  if (!doc.is_object()) throw ConfigError(section, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string path = section + "." + key;
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(path, "unknown key");
    it->second(config, value, path);
  }
}

// Maps a bare field name from a validate() call back to its section.
std::string qualify(const std::string& field) {
  if (sim_fields().count(field)) return "sim." + field;
  if (agent_fields().count(field)) return "agent." + field;
  if (train_fields().count(field)) return "train." + field;
  return field;
}

}  // namespace

TrainConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  TrainConfig config;
  bool learn_start_given = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "sim") {
      apply_section(config, value, "sim", sim_fields());
    } else if (key == "agent") {
      apply_section(config, value, "agent", agent_fields());
      learn_start_given = value.contains("learn_start");
    } else if (key == "train") {
      apply_section(config, value, "train", train_fields());
    } else {
      throw ConfigError(key, "unknown section");
    }
  }
  if (!learn_start_given) config.agent.learn_start = config.agent.batch_size;

  try {
    config.validate();
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    throw ConfigError(qualify(e.field()), message.substr(e.field().size() + 2));
  }
  return config;
}

TrainConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const TrainConfig& c) {
  json doc;
  doc["sim"] = {
      {"num_edges", c.sim.num_edges},         {"uav_capacity", c.sim.uav_capacity},
      {"edge_capacity", c.sim.edge_capacity}, {"dist_min", c.sim.dist_min},
      {"dist_max", c.sim.dist_max},           {"uav_data_rate", c.sim.uav_data_rate},
      {"edge_clock", c.sim.edge_clock},       {"p_tx", c.sim.p_tx},
      {"p_move", c.sim.p_move},               {"initial_energy", c.sim.initial_energy},
      {"in_min", c.sim.in_min},               {"in_max", c.sim.in_max},
      {"out_min", c.sim.out_min},             {"out_max", c.sim.out_max},
      {"alpha", c.sim.alpha},                 {"beta", c.sim.beta},
      {"max_steps", c.sim.max_steps},         {"dist_ref", c.sim.dist_ref},
      {"walk_step", c.sim.walk_step},
  };
  doc["agent"] = {
      {"gamma", c.agent.gamma},
      {"batch_size", c.agent.batch_size},
      {"target_update_every", c.agent.target_update_every},
      {"epsilon_start", c.agent.epsilon_start},
      {"epsilon_end", c.agent.epsilon_end},
      {"epsilon_decay_episodes", c.agent.epsilon_decay_episodes},
      {"learn_start", c.agent.learn_start},
      {"replay_capacity", c.agent.replay_capacity},
      {"hidden", c.agent.hidden},
      {"learning_rate", c.agent.adam.learning_rate},
      {"adam_beta1", c.agent.adam.beta1},
      {"adam_beta2", c.agent.adam.beta2},
      {"adam_epsilon", c.agent.adam.epsilon},
  };
  doc["train"] = {
      {"total_episodes", c.total_episodes}, {"seed", c.seed},
      {"reward_variant", to_string(c.reward_variant)}, {"eval_every", c.eval_every},
      {"eval_episodes", c.eval_episodes},
  };
  return doc;
}

}  // namespace uavedge
