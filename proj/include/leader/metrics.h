#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leader/episode_log.h"

namespace leader {

struct MetricsReport {
  double cumulative_reward = 0.0;   // mean discounted return per episode
  double collision_rate = 0.0;      // collisions per 1000 steps
  double travelled_distance = 0.0;  // mean metres per episode
  double smoothness_factor = 0.0;   // mean of 1 / max(1, decelerations)
  int episodes = 0;
  long steps = 0;
  long collisions = 0;
};

/// Throws std::invalid_argument on an empty list.
MetricsReport compute_metrics(std::span<const EpisodeLog> logs);

using LabelledReport = std::pair<std::string, MetricsReport>;
/// One report per map followed by a pooled "all" report.
std::vector<LabelledReport> per_map_metrics(std::span<const EpisodeLog> logs);
void write_metrics_csv(const std::filesystem::path& file, std::span<const LabelledReport> reports);
std::string format_metrics_csv(std::span<const LabelledReport> reports);

}  // namespace leader
