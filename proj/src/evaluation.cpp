#include "leader/evaluation.h"

#include <stdexcept>

#include "leader/attention.h"
#include "leader/checkpoint.h"
#include "leader/trainer.h"

namespace leader {
namespace {

constexpr std::uint64_t kEvalNoiseKey = 0x4556414cull;

}  // namespace

PolicyKind parse_policy(const std::string& name) {
  if (name == "leader") return PolicyKind::kLeader;
  if (name == "uniform") return PolicyKind::kUniform;
  if (name == "ttc") return PolicyKind::kTtc;
  throw std::invalid_argument("unknown policy: " + name);
}

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kLeader: return "leader";
    case PolicyKind::kUniform: return "uniform";
    case PolicyKind::kTtc: return "ttc";
  }
  return "?";
}

nn::Generator load_generator(const std::filesystem::path& checkpoint) {
  const auto header = nn::read_checkpoint_header(checkpoint);
  nn::Generator generator(header.layout);
  nn::Critic critic(header.layout);
  nn::load_checkpoint(checkpoint, generator, critic);
  return generator;
}

EvaluationResult run_evaluation(const EvaluationConfig& config, PolicyKind policy, const PlannerConfig& planner,
                                const DrivingModel& model, std::span<const ScenarioSpec> scenarios,
                                const nn::Generator* generator, const EpisodeOptions& episode_options) {
  if (config.episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  if (scenarios.empty()) throw std::invalid_argument("evaluation needs at least one scenario");
  if (policy == PolicyKind::kLeader && !generator) throw std::invalid_argument("leader policy needs a generator");
  planner.validate();

  EvaluationResult result;
  for (int e = 0; e < config.episodes; ++e) {
    const ScenarioSpec& spec = scenarios[static_cast<std::size_t>(e) % scenarios.size()];
    const std::uint64_t seed = episode_seed(config.seed, static_cast<std::uint64_t>(e));
    Episode episode(spec, model, seed, episode_options);
    EpisodeLog log;
    log.scenario = spec.name;
    log.map = spec.map->name();
    log.policy = policy_name(policy);
    log.seed = seed;
    log.gamma = planner.gamma;
    log.ego_path = episode.state().ego.path;

    std::vector<double> memory;
    if (generator) memory.assign(static_cast<std::size_t>(generator->layout().hidden), 0.0);
    ScenarioStream noise(mix64(seed ^ kEvalNoiseKey));

    while (!episode.done()) {
      StepLog s;
      s.t = episode.step_index();
      s.observation = episode.observation();
      s.belief = episode.belief();
      for (const auto& ctx : *episode.agents()) s.paths.push_back(ctx.paths);
      switch (policy) {
        case PolicyKind::kUniform:
          s.attention = uniform_attention(s.belief);
          break;
        case PolicyKind::kTtc:
          s.attention = ttc_attention(s.belief, s.observation, *episode.agents(), model.params());
          break;
        case PolicyKind::kLeader: {
          const auto eps = config.attention_noise ? nn::draw_logit_noise(generator->layout(), noise)
                                                  : std::vector<double>(generator->layout().belief_size(), 0.0);
          auto sample = nn::generate_attention(*generator, s.belief, s.observation, eps, memory);
          s.attention = std::move(sample.attention);
          memory = std::move(sample.memory);
          break;
        }
      }
      const PlanResult plan_result = plan(model, s.belief, s.observation, s.attention, episode.agents(), planner,
                                          planner_seed(seed, s.t));
      s.action = plan_result.action;
      s.value = plan_result.value_estimate;
      const Vec2 before = episode.state().ego.position;
      const auto outcome = episode.step(s.action);
      s.reward = outcome.reward;
      s.collision = outcome.collision;
      s.distance = (episode.state().ego.position - before).norm();
      log.steps.push_back(std::move(s));
    }
    result.logs.push_back(std::move(log));
  }
  result.reports = per_map_metrics(result.logs);
  result.pooled = result.reports.back().second;
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    write_episode_logs(config.output_dir / "episodes.jsonl", result.logs);
    write_metrics_csv(config.output_dir / "metrics.csv", result.reports);
  }
  return result;
}

}  // namespace leader
