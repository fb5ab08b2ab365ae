#pragma once

#include <memory>
#include <vector>

#include "leader/driving_model.h"

namespace leader::testing {

inline std::shared_ptr<const Polyline> straight_path(Vec2 from, Vec2 to) {
  return std::make_shared<const Polyline>(std::vector<Vec2>{from, to});
}

inline EgoState ego_at(Vec2 position, double speed, std::shared_ptr<const Polyline> path) {
  EgoState ego;
  ego.position = position;
  ego.speed = speed;
  const auto& pts = path->points();
  const Vec2 d = pts[1] - pts[0];
  ego.heading = std::atan2(d.y, d.x);
  ego.path = std::move(path);
  return ego;
}

/// Ego driving east along y = 0 from x = 0 with no exo-agents.
inline WorldState empty_road(double ego_x, double speed, double length = 200.0) {
  WorldState s;
  s.ego = ego_at({ego_x, 0.0}, speed, straight_path({0.0, 0.0}, {length, 0.0}));
  s.agents = std::make_shared<const AgentContexts>();
  return s;
}

/// One agent at `start` heading north with two intentions: keep north
/// (crossing y = 0) or turn west after `turn_after` metres.
inline AgentContext crossing_agent_context(Vec2 start, double turn_after, double preferred_speed) {
  AgentContext ctx;
  const Vec2 fork{start.x, start.y + turn_after};
  ctx.paths.push_back(Polyline({start, fork, {fork.x - 40.0, fork.y}}));
  ctx.paths.push_back(Polyline({start, {start.x, start.y + 60.0}}));
  ctx.preferred_speed = preferred_speed;
  return ctx;
}

inline ExoState exo_at(Vec2 position, double speed, double heading) {
  ExoState e;
  e.position = position;
  e.speed = speed;
  e.heading = heading;
  return e;
}

}  // namespace leader::testing
