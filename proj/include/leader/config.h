#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "leader/driving_model.h"
#include "leader/episode.h"
#include "leader/evaluation.h"
#include "leader/networks.h"
#include "leader/planner.h"
#include "leader/trainer.h"

namespace leader {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything the command-line tool needs, read from an INI file with the
/// sections [map], [planner], [networks], [training] and [evaluation].
/// Relative paths are resolved against the directory of the file. Unknown
/// sections or keys are rejected.
struct AppConfig {
  std::vector<std::filesystem::path> scenarios;
  DrivingParams driving;
  EpisodeOptions episode;
  PlannerConfig planner;
  nn::NetworkLayout layout;
  TrainConfig training;
  EvaluationConfig evaluation;

  static AppConfig load(const std::filesystem::path& file);
  static AppConfig from_string(const std::string& text, const std::filesystem::path& base_dir);

  std::vector<ScenarioSpec> load_scenarios() const;
};

}  // namespace leader
