#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "leader/checkpoint.h"
#include "leader/config.h"
#include "leader/episode_log.h"
#include "leader/evaluation.h"
#include "leader/metrics.h"
#include "leader/trainer.h"

namespace {

using namespace leader;

int run_train(const std::filesystem::path& config_file, std::optional<std::uint64_t> seed) {
  AppConfig config = AppConfig::load(config_file);
  if (seed) config.training.seed = *seed;
  const auto scenarios = config.load_scenarios();
  const DrivingModel model(config.driving);
  nn::Generator generator(config.layout);
  nn::Critic critic(config.layout);
  initialize_networks(generator, critic, config.training.seed);

  const TrainResult result = train(config.training, config.planner, model, scenarios, generator, critic, config.episode);
  std::cout << "environment steps: " << result.environment_steps << '\n'
            << "episodes: " << result.curve.size() << '\n'
            << "critic steps: " << result.critic_steps << '\n'
            << "generator steps: " << result.generator_steps << '\n'
            << "output: " << config.training.output_dir.string() << '\n';
  return 0;
}

int run_eval(const std::filesystem::path& config_file, const std::string& policy_arg, std::optional<int> episodes,
             std::optional<std::uint64_t> seed, const std::string& checkpoint, const std::string& output) {
  AppConfig config = AppConfig::load(config_file);
  if (episodes) config.evaluation.episodes = *episodes;
  if (seed) config.evaluation.seed = *seed;
  if (!checkpoint.empty()) config.evaluation.checkpoint = checkpoint;
  if (!output.empty()) config.evaluation.output_dir = output;
  const PolicyKind policy = parse_policy(policy_arg);
  const auto scenarios = config.load_scenarios();
  const DrivingModel model(config.driving);

  std::optional<nn::Generator> generator;
  if (policy == PolicyKind::kLeader) {
    if (config.evaluation.checkpoint.empty()) throw std::invalid_argument("leader policy needs a checkpoint");
    generator = load_generator(config.evaluation.checkpoint);
  }
  const auto result = run_evaluation(config.evaluation, policy, config.planner, model, scenarios,
                                     generator ? &*generator : nullptr, config.episode);
  std::cout << format_metrics_csv(result.reports);
  return 0;
}

int run_replay(const std::filesystem::path& log_file) {
  const auto logs = read_episode_logs(log_file);
  std::cout << format_metrics_csv(per_map_metrics(logs));
  return 0;
}

int run_export(const std::filesystem::path& log_file, int step, int episode, const std::string& output) {
  const auto logs = read_episode_logs(log_file);
  if (episode < 0 || episode >= static_cast<int>(logs.size())) {
    throw std::out_of_range("episode " + std::to_string(episode) + " outside log of " + std::to_string(logs.size()) +
                            " episodes");
  }
  const EpisodeLog& log = logs[static_cast<std::size_t>(episode)];
  if (output.empty()) {
    export_attention_snapshot(log, step, std::cout);
  } else {
    std::ofstream out(output, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + output);
    export_attention_snapshot(log, step, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned attention for importance-sampling belief-tree planning in urban driving"};
  app.require_subcommand(1);

  std::string config_file;
  std::optional<std::uint64_t> seed;

  auto* train_cmd = app.add_subcommand("train", "Train the attention generator and critic");
  train_cmd->add_option("config", config_file, "INI configuration")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "Override [training] seed");

  std::string policy = "uniform";
  std::optional<int> episodes;
  std::string checkpoint, output;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a planner policy on the configured scenarios");
  eval_cmd->add_option("config", config_file, "INI configuration")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--policy", policy, "Attention source")
      ->check(CLI::IsMember({"leader", "uniform", "ttc"}));
  eval_cmd->add_option("--episodes", episodes, "Number of episodes");
  eval_cmd->add_option("--seed", seed, "Evaluation seed");
  eval_cmd->add_option("--checkpoint", checkpoint, "Generator checkpoint (leader policy)");
  eval_cmd->add_option("--output", output, "Directory for episode logs and metrics");

  std::string log_file;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute metrics from an episode log");
  replay_cmd->add_option("log", log_file, "Episode log (JSON lines)")->required()->check(CLI::ExistingFile);

  int step = 0;
  int episode = 0;
  auto* export_cmd = app.add_subcommand("export-attention", "Export belief and attention over candidate paths");
  export_cmd->add_option("log", log_file, "Episode log (JSON lines)")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--step", step, "Time index")->required();
  export_cmd->add_option("--episode", episode, "Episode index within the log");
  export_cmd->add_option("--output", output, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return run_train(config_file, seed);
    if (*eval_cmd) return run_eval(config_file, policy, episodes, seed, checkpoint, output);
    if (*replay_cmd) return run_replay(log_file);
    if (*export_cmd) return run_export(log_file, step, episode, output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
