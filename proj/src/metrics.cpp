#include "leader/metrics.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace leader {

MetricsReport compute_metrics(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw std::invalid_argument("metrics need at least one episode");
  MetricsReport r;
  for (const auto& log : logs) {
    double discount = 1.0;
    double ret = 0.0;
    double distance = 0.0;
    int decelerations = 0;
    for (const auto& s : log.steps) {
      ret += discount * s.reward;
      discount *= log.gamma;
      distance += s.distance;
      if (s.action == Action::kDec) ++decelerations;
      if (s.collision) ++r.collisions;
    }
    r.cumulative_reward += ret;
    r.travelled_distance += distance;
    r.smoothness_factor += 1.0 / std::max(1, decelerations);
    r.steps += static_cast<long>(log.steps.size());
  }
  const double n = static_cast<double>(logs.size());
  r.episodes = static_cast<int>(logs.size());
  r.cumulative_reward /= n;
  r.travelled_distance /= n;
  r.smoothness_factor /= n;
  r.collision_rate = r.steps > 0 ? 1000.0 * static_cast<double>(r.collisions) / static_cast<double>(r.steps) : 0.0;
  return r;
}

std::vector<LabelledReport> per_map_metrics(std::span<const EpisodeLog> logs) {
  std::vector<std::string> maps;
  for (const auto& log : logs) {
    if (std::find(maps.begin(), maps.end(), log.map) == maps.end()) maps.push_back(log.map);
  }
  std::sort(maps.begin(), maps.end());
  std::vector<LabelledReport> out;
  for (const auto& m : maps) {
    std::vector<EpisodeLog> subset;
    for (const auto& log : logs) {
      if (log.map == m) subset.push_back(log);
    }
    out.emplace_back(m, compute_metrics(subset));
  }
  out.emplace_back("all", compute_metrics(logs));
  return out;
}

std::string format_metrics_csv(std::span<const LabelledReport> reports) {
  std::ostringstream out;
  out << "label,episodes,steps,collisions,cumulative_reward,collision_rate,travelled_distance,smoothness_factor\n";
  out << std::setprecision(17);
  for (const auto& [label, r] : reports) {
    out << label << ',' << r.episodes << ',' << r.steps << ',' << r.collisions << ',' << r.cumulative_reward << ','
        << r.collision_rate << ',' << r.travelled_distance << ',' << r.smoothness_factor << '\n';
  }
  return out.str();
}

void write_metrics_csv(const std::filesystem::path& file, std::span<const LabelledReport> reports) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write metrics: " + file.string());
  out << format_metrics_csv(reports);
}

}  // namespace leader
