#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavedge/cli.hpp"
#include "uavedge/config_io.hpp"
#include "uavedge/errors.hpp"
#include "uavedge/format.hpp"
#include "uavedge/metrics_csv.hpp"
#include "uavedge/nn.hpp"
#include "uavedge/svg.hpp"
#include "uavedge/train.hpp"

namespace uavedge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kDefaultSmoothing = 50;
constexpr const char* kFullColor = "#1f77b4";
constexpr const char* kEnergyOverflowColor = "#e377c2";

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  // eval
  std::string checkpoint_path;
  std::vector<std::string> policies;
  std::optional<int> episodes;
  std::string eval_out = "eval.csv";
  // plot
  std::string metrics_path;
  std::string svg_path;
  std::size_t smooth = kDefaultSmoothing;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

TrainConfig resolve_config(const Options& opt) {
  TrainConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = load_config(opt.config_path);
  } else {
    cfg.validate();
  }
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<double> reward_column(const std::vector<EpisodeRecord>& records) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const EpisodeRecord& r : records) v.push_back(r.total_reward);
  return v;
}

json summary_json(const EvalSummary& s) {
  return {{"episodes", s.episodes},
          {"mean_reward", s.mean_reward},
          {"stdev_reward", s.stdev_reward},
          {"overflow_rate", s.overflow_rate},
          {"mean_length", s.mean_length}};
}

std::string summary_csv_fields(const EvalSummary& s) {
  return std::to_string(s.episodes) + ',' + format_double(s.mean_reward) + ',' +
         format_double(s.stdev_reward) + ',' + format_double(s.overflow_rate) + ',' +
         format_double(s.mean_length);
}

json manifest_json(const char* command, const TrainConfig& cfg,
                   const std::map<std::string, fs::path>& artifacts, double seconds) {
  json doc;
  doc["tool_version"] = kToolVersion;
  doc["command"] = command;
  doc["seed"] = cfg.seed;
  doc["config"] = config_to_json(cfg);
  json paths = json::object();
  for (const auto& [name, path] : artifacts) paths[name] = path.string();
  doc["artifacts"] = paths;
  doc["wall_clock_seconds"] = seconds;
  return doc;
}

void print_summary_table(std::ostream& out,
                         const std::vector<std::pair<std::string, EvalSummary>>& rows) {
  out << std::left << std::setw(20) << "policy" << std::right << std::setw(8) << "episodes"
      << std::setw(14) << "mean_reward" << std::setw(14) << "stdev_reward" << std::setw(14)
      << "overflow_rate" << std::setw(12) << "mean_length" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& [name, s] : rows) {
    out << std::left << std::setw(20) << name << std::right << std::setw(8) << s.episodes
        << std::setw(14) << s.mean_reward << std::setw(14) << s.stdev_reward << std::setw(14)
        << s.overflow_rate << std::setw(12) << s.mean_length << '\n';
  }
  out << std::defaultfloat;
}

int cmd_train(const Options& opt, std::ostream& out) {
  const TrainConfig cfg = resolve_config(opt);
  const fs::path dir = opt.out_dir;
  ensure_dir(dir);

  Stopwatch clock;
  const int report_every = std::max(1, cfg.total_episodes / 10);
  double window_sum = 0.0;
  int window_n = 0;
  TrainObserver observer;
  observer.on_episode = [&](const EpisodeRecord& r) {
    window_sum += r.total_reward;
    ++window_n;
    if (r.episode % report_every == 0 || r.episode == cfg.total_episodes) {
      out << "episode " << r.episode << '/' << cfg.total_episodes << "  mean reward "
          << window_sum / window_n << "  epsilon " << r.epsilon << '\n';
      window_sum = 0.0;
      window_n = 0;
    }
  };
  const TrainResult result = run_training(cfg, &observer);

  const fs::path metrics = dir / "metrics.csv";
  const fs::path checkpoint = dir / "checkpoint.qnet";
  const fs::path svg = dir / "learning_curve.svg";
  const fs::path manifest = dir / "manifest.json";
  save_metrics_csv(metrics, result.episodes);
  save_checkpoint(result.network, checkpoint);

  const std::vector<ChartSeries> series = {
      {std::string(to_string(cfg.reward_variant)) + " (MA" + std::to_string(kDefaultSmoothing) + ")",
       kFullColor, trailing_moving_average(reward_column(result.episodes), kDefaultSmoothing)}};
  write_text_file(svg, render_line_chart(series, {"Accumulated reward per episode", "episode",
                                                  "reward"}));

  json doc = manifest_json("train", cfg,
                           {{"metrics_csv", metrics}, {"checkpoint", checkpoint}, {"svg", svg}},
                           clock.seconds());
  json evals = json::array();
  for (const EvalPoint& p : result.evals) {
    json e = summary_json(p.summary);
    e["after_episode"] = p.episode;
    evals.push_back(e);
  }
  doc["eval_history"] = evals;
  write_text_file(manifest, doc.dump(2) + "\n");

  out << "wrote " << metrics.string() << ", " << checkpoint.string() << ", " << svg.string()
      << ", " << manifest.string() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& opt, std::ostream& out) {
  const TrainConfig cfg = resolve_config(opt);
  std::vector<std::string> names = opt.policies;
  if (names.empty()) names.push_back(to_string(PolicyKind::dqn_checkpoint));

  std::vector<PolicyKind> kinds;
  bool needs_checkpoint = false;
  for (const std::string& n : names) {
    const std::optional<PolicyKind> k = parse_policy_kind(n);
    if (!k) {
      throw ConfigError("--policy", "unknown policy '" + n +
                                        "' (dqn-checkpoint, random, nearest-edge, max-free-capacity)");
    }
    kinds.push_back(*k);
    needs_checkpoint = needs_checkpoint || *k == PolicyKind::dqn_checkpoint;
  }

  std::optional<QNetwork> net;
  if (needs_checkpoint) {
    if (opt.checkpoint_path.empty()) {
      throw ConfigError("--checkpoint", "required for the dqn-checkpoint policy");
    }
    net = load_checkpoint(opt.checkpoint_path);
    if (net->input_dim() != cfg.sim.observation_dim() || net->output_dim() != cfg.sim.num_edges) {
      throw CheckpointError(
          CheckpointError::Kind::shape,
          "checkpoint shape mismatch: network maps " + std::to_string(net->input_dim()) + " -> " +
              std::to_string(net->output_dim()) + " but config has " +
              std::to_string(cfg.sim.num_edges) + " edges (observation dim " +
              std::to_string(cfg.sim.observation_dim()) + ")");
    }
  }

  const int episodes = opt.episodes.value_or(cfg.eval_episodes);
  const std::uint64_t env_seed = evaluation_seed(cfg.seed);
  std::vector<std::pair<std::string, EvalSummary>> rows;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    rows.emplace_back(to_string(kinds[i]),
                      evaluate(kinds[i], cfg.sim, episodes, env_seed, net ? &*net : nullptr));
  }

  std::string csv = "policy,episodes,mean_reward,stdev_reward,overflow_rate,mean_length\n";
  for (const auto& [name, s] : rows) csv += name + ',' + summary_csv_fields(s) + '\n';
  const fs::path csv_path = opt.eval_out;
  if (csv_path.has_parent_path()) ensure_dir(csv_path.parent_path());
  write_text_file(csv_path, csv);

  print_summary_table(out, rows);
  out << "wrote " << csv_path.string() << '\n';
  return kExitOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  const TrainConfig cfg = resolve_config(opt);
  const fs::path dir = opt.out_dir;
  ensure_dir(dir);

  Stopwatch clock;
  const VariantComparison cmp = compare_variants(cfg);

  const fs::path full_csv = dir / "metrics_full.csv";
  const fs::path eo_csv = dir / "metrics_energy_overflow.csv";
  const fs::path combined_csv = dir / "compare.csv";
  const fs::path eval_csv = dir / "compare_eval.csv";
  const fs::path svg = dir / "compare.svg";
  const fs::path full_ckpt = dir / "checkpoint_full.qnet";
  const fs::path eo_ckpt = dir / "checkpoint_energy_overflow.qnet";
  const fs::path manifest = dir / "manifest.json";

  save_metrics_csv(full_csv, cmp.full.episodes);
  save_metrics_csv(eo_csv, cmp.energy_overflow.episodes);
  save_checkpoint(cmp.full.network, full_ckpt);
  save_checkpoint(cmp.energy_overflow.network, eo_ckpt);

  std::string combined = "variant," + std::string(kMetricsHeader) + '\n';
  for (const EpisodeRecord& r : cmp.full.episodes) combined += "full," + metrics_row(r) + '\n';
  for (const EpisodeRecord& r : cmp.energy_overflow.episodes) {
    combined += "energy_overflow," + metrics_row(r) + '\n';
  }
  write_text_file(combined_csv, combined);

  write_text_file(eval_csv,
                  "variant,episodes,mean_reward,stdev_reward,overflow_rate,mean_length\n"
                  "full," + summary_csv_fields(cmp.full_eval) + "\n"
                  "energy_overflow," + summary_csv_fields(cmp.energy_overflow_eval) + "\n");

  const std::string ma = " (MA" + std::to_string(kDefaultSmoothing) + ")";
  const std::vector<ChartSeries> series = {
      {"full" + ma, kFullColor,
       trailing_moving_average(reward_column(cmp.full.episodes), kDefaultSmoothing)},
      {"energy_overflow" + ma, kEnergyOverflowColor,
       trailing_moving_average(reward_column(cmp.energy_overflow.episodes), kDefaultSmoothing)}};
  write_text_file(svg, render_line_chart(series, {"Accumulated reward per episode by reward variant",
                                                  "episode", "reward (own training variant)"}));

  json doc = manifest_json("compare", cfg,
                           {{"metrics_full_csv", full_csv},
                            {"metrics_energy_overflow_csv", eo_csv},
                            {"compare_csv", combined_csv},
                            {"compare_eval_csv", eval_csv},
                            {"svg", svg},
                            {"checkpoint_full", full_ckpt},
                            {"checkpoint_energy_overflow", eo_ckpt}},
                           clock.seconds());
  doc["evaluation"] = {{"metric", "full"},
                       {"full", summary_json(cmp.full_eval)},
                       {"energy_overflow", summary_json(cmp.energy_overflow_eval)}};
  write_text_file(manifest, doc.dump(2) + "\n");

  out << "evaluation under the full reward:\n";
  print_summary_table(out, {{"full", cmp.full_eval}, {"energy_overflow", cmp.energy_overflow_eval}});
  out << "wrote outputs to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_plot(const Options& opt, std::ostream& out) {
  const std::vector<EpisodeRecord> records = load_metrics_csv(opt.metrics_path);
  const std::vector<ChartSeries> series = {
      {"total_reward (MA" + std::to_string(opt.smooth) + ")", kFullColor,
       trailing_moving_average(reward_column(records), opt.smooth)}};
  const fs::path svg = opt.svg_path;
  if (svg.has_parent_path()) ensure_dir(svg.parent_path());
  write_text_file(svg, render_line_chart(series, {"Accumulated reward per episode", "episode",
                                                  "reward"}));
  out << "wrote " << svg.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"UAV edge-selection simulator and DQN trainer", "uavedge"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Options opt;
  auto add_seed = [&opt](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed", [&opt](const std::uint64_t& s) { opt.seed = s; }, "override the run seed");
  };

  CLI::App* train = app.add_subcommand("train", "train a DQN edge-selection policy");
  train->add_option("--config", opt.config_path, "JSON config file (defaults when omitted)");
  train->add_option("--out", opt.out_dir, "output directory")->required();
  add_seed(train);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint or baseline policy");
  eval->add_option("--checkpoint", opt.checkpoint_path, "qnet-v1 checkpoint file");
  eval->add_option("--config", opt.config_path, "JSON config file (defaults when omitted)");
  eval->add_option("--policy", opt.policies,
                   "dqn-checkpoint | random | nearest-edge | max-free-capacity (repeatable)");
  eval->add_option_function<int>(
      "--episodes", [&opt](const int& n) { opt.episodes = n; }, "evaluation episodes");
  eval->add_option("--out", opt.eval_out, "eval CSV path")->capture_default_str();
  add_seed(eval);

  CLI::App* compare = app.add_subcommand("compare", "train and compare both reward variants");
  compare->add_option("--config", opt.config_path, "JSON config file (defaults when omitted)");
  compare->add_option("--out", opt.out_dir, "output directory")->required();
  add_seed(compare);

  CLI::App* plot = app.add_subcommand("plot", "render a metrics CSV as an SVG learning curve");
  plot->add_option("metrics_csv", opt.metrics_path, "metrics CSV")->required();
  plot->add_option("out_svg", opt.svg_path, "output SVG path")->required();
  plot->add_option("--smooth", opt.smooth, "trailing moving-average window")->capture_default_str();
  add_seed(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) return cmd_train(opt, out);
    if (*eval) return cmd_eval(opt, out);
    if (*compare) return cmd_compare(opt, out);
    if (*plot) return cmd_plot(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const CsvError& e) {
    err << "csv error: " << e.what() << '\n';
    return kExitCsv;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace uavedge
