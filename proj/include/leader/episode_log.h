#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "leader/belief.h"
#include "leader/driving_model.h"

namespace leader {

struct StepLog {
  int t = 0;
  Observation observation;                  // before the action
  IntentionDistribution belief;
  IntentionDistribution attention;
  std::vector<std::vector<Polyline>> paths; // candidate paths per agent
  Action action = Action::kCur;
  double reward = 0.0;
  double value = 0.0;                       // planner value estimate
  bool collision = false;                   // after the action
  double distance = 0.0;                    // ego displacement during the step
};

struct EpisodeLog {
  std::string scenario;
  std::string map;
  std::string policy;
  std::uint64_t seed = 0;
  double gamma = 0.95;
  std::shared_ptr<const Polyline> ego_path;
  std::vector<StepLog> steps;
};

/// Line-delimited JSON: one "episode" header record followed by one "step"
/// record per time index.
void write_episode_log(std::ostream& out, const EpisodeLog& log);
void write_episode_logs(const std::filesystem::path& file, const std::vector<EpisodeLog>& logs);
/// Reads every episode in the stream. Throws std::runtime_error on malformed
/// records or non-contiguous time indices.
std::vector<EpisodeLog> read_episode_logs(std::istream& in);
std::vector<EpisodeLog> read_episode_logs(const std::filesystem::path& file);

/// Line-delimited records for one step: the ego with its path, each agent,
/// and one record per candidate path with its belief and attention values.
/// Throws std::out_of_range for a step outside the log.
void export_attention_snapshot(const EpisodeLog& log, int step, std::ostream& out);

}  // namespace leader
