#include "leader/attention.h"

#include <algorithm>
#include <stdexcept>

namespace leader {

IntentionDistribution uniform_attention(const IntentionDistribution& b) {
  std::vector<std::vector<double>> probs;
  probs.reserve(b.agent_count());
  for (std::size_t i = 0; i < b.agent_count(); ++i) {
    const std::size_t m = b.intention_count(i);
    probs.emplace_back(m, 1.0 / static_cast<double>(m));
  }
  return IntentionDistribution(std::move(probs));
}

double path_time_to_collision(const EgoState& ego, const ExoState& agent, const Polyline& path,
                              const DrivingParams& driving, const TtcAttentionParams& params) {
  const Polyline& ego_path = *ego.path;
  const double ego_start = ego_path.project(ego.position).arc;
  const double agent_start = path.project(agent.position).arc;
  const double reach = driving.ego_radius + driving.exo_radius;
  const double reach2 = reach * reach;
  const int steps = static_cast<int>(params.horizon / params.time_step);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * params.time_step;
    const Vec2 e = ego_path.point_at(ego_start + ego.speed * t);
    const Vec2 a = path.point_at(agent_start + agent.speed * t);
    if ((e - a).squared_norm() <= reach2) return std::max(t, params.min_ttc);
  }
  return params.horizon;
}

std::vector<double> attention_from_ttc(std::span<const double> ttc) {
  std::vector<double> scores(ttc.size());
  double total = 0.0;
  for (std::size_t m = 0; m < ttc.size(); ++m) {
    if (!(ttc[m] > 0.0)) throw std::invalid_argument("time-to-collision must be positive");
    scores[m] = 1.0 / ttc[m];
    total += scores[m];
  }
  for (double& s : scores) s /= total;
  return apply_floor(scores);
}

IntentionDistribution ttc_attention(const IntentionDistribution& b, const Observation& z, const AgentContexts& agents,
                                    const DrivingParams& driving, const TtcAttentionParams& params) {
  if (agents.size() != b.agent_count() || z.exo.size() != b.agent_count()) {
    throw std::invalid_argument("attention inputs disagree on agent count");
  }
  std::vector<std::vector<double>> probs;
  probs.reserve(b.agent_count());
  for (std::size_t i = 0; i < b.agent_count(); ++i) {
    std::vector<double> ttc;
    ttc.reserve(agents[i].paths.size());
    for (const auto& path : agents[i].paths) {
      ttc.push_back(path_time_to_collision(z.ego, z.exo[i], path, driving, params));
    }
    probs.push_back(attention_from_ttc(ttc));
  }
  return IntentionDistribution(std::move(probs));
}

}  // namespace leader
