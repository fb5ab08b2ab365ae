#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leader/episode.h"
#include "leader/episode_log.h"
#include "leader/metrics.h"
#include "leader/networks.h"
#include "leader/planner.h"

namespace leader {

enum class PolicyKind { kLeader, kUniform, kTtc };
PolicyKind parse_policy(const std::string& name);
const char* policy_name(PolicyKind kind);

struct EvaluationConfig {
  int episodes = 200;
  std::uint64_t seed = 7;
  bool attention_noise = false;       // leader only: sample logit noise instead of using zero
  std::filesystem::path checkpoint;   // leader only
  std::filesystem::path output_dir;   // empty: nothing written
};

struct EvaluationResult {
  std::vector<EpisodeLog> logs;
  std::vector<LabelledReport> reports;  // per map, then pooled
  MetricsReport pooled;
};

/// Runs `config.episodes` episodes cycling through the scenarios. Episode i
/// uses the same seed under every policy, so environment noise, spawn
/// perturbations and planner scenario streams are shared. `generator` is
/// required for the leader policy and is never modified.
EvaluationResult run_evaluation(const EvaluationConfig& config, PolicyKind policy, const PlannerConfig& planner,
                                const DrivingModel& model, std::span<const ScenarioSpec> scenarios,
                                const nn::Generator* generator, const EpisodeOptions& episode_options = {});

/// Generator restored from a checkpoint; throws nn::CheckpointError when the
/// file is missing or malformed.
nn::Generator load_generator(const std::filesystem::path& checkpoint);

}  // namespace leader
