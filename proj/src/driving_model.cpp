#include "leader/driving_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace leader {

const char* action_name(Action a) {
  switch (a) {
    case Action::kAcc: return "ACC";
    case Action::kCur: return "CUR";
    case Action::kDec: return "DEC";
  }
  return "?";
}

Action action_from_index(int index) {
  if (index < 0 || index >= kActionCount) throw std::invalid_argument("action index out of range");
  return static_cast<Action>(index);
}

void WorldState::validate() const {
  if (!ego.path || ego.path->size() < 2) throw std::invalid_argument("ego reference path needs two points");
  if (intentions.size() != exo.size()) throw std::invalid_argument("one intention per exo-agent required");
  if (!exo.empty() && (!agents || agents->size() != exo.size())) {
    throw std::invalid_argument("one agent context per exo-agent required");
  }
  for (std::size_t i = 0; i < exo.size(); ++i) {
    const int m = static_cast<int>((*agents)[i].paths.size());
    if (intentions[i] < 0 || intentions[i] >= m) {
      throw std::invalid_argument("intention index out of range for agent " + std::to_string(i));
    }
  }
}

EgoStepResult step_ego(const EgoState& ego, Action action, const DrivingParams& params) {
  if (!(params.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const Polyline& path = *ego.path;

  const double s = path.project(ego.position).arc;
  const double lookahead = std::max(1.0, 0.5 * ego.speed);
  const Vec2 target = path.point_at(s + lookahead);
  const Vec2 to_target = target - ego.position;
  double steering = 0.0;
  if (to_target.squared_norm() > 1e-12) {
    const double alpha = wrap_angle(std::atan2(to_target.y, to_target.x) - ego.heading);
    steering = std::atan2(2.0 * params.wheelbase * std::sin(alpha), lookahead);
    steering = std::clamp(steering, -params.max_steer, params.max_steer);
  }

  double accel = 0.0;
  if (action == Action::kAcc) accel = params.acceleration;
  if (action == Action::kDec) accel = -params.acceleration;

  EgoStepResult out;
  out.steering = steering;
  out.ego.path = ego.path;
  out.ego.speed = std::clamp(ego.speed + accel * params.dt, 0.0, params.v_max);
  out.ego.position = ego.position + unit_from_angle(ego.heading) * (out.ego.speed * params.dt);
  out.ego.heading = wrap_angle(ego.heading + out.ego.speed / params.wheelbase * std::tan(steering) * params.dt);
  const double remaining = path.length() - path.project(out.ego.position).arc;
  out.path_exhausted = remaining <= params.path_end_tolerance;
  return out;
}

double exo_forward_ttc(const WorldState& state, std::size_t i, const DrivingParams& params) {
  const ExoState& me = state.exo[i];
  const Vec2 u = unit_from_angle(me.heading);
  double best = std::numeric_limits<double>::infinity();

  auto consider = [&](Vec2 pos, double speed, double heading, double radius) {
    const Vec2 d = pos - me.position;
    const double along = d.dot(u);
    if (along <= 0.0) return;
    const double reach = params.exo_radius + radius;
    if (std::abs(u.cross(d)) >= reach) return;
    const double gap = along - reach;
    if (gap <= 0.0) {
      best = 0.0;
      return;
    }
    const double closing = me.speed - speed * u.dot(unit_from_angle(heading));
    if (closing <= 0.0) return;
    best = std::min(best, gap / closing);
  };

  for (std::size_t j = 0; j < state.exo.size(); ++j) {
    if (j == i) continue;
    const ExoState& other = state.exo[j];
    consider(other.position, other.speed, other.heading, params.exo_radius);
  }
  consider(state.ego.position, state.ego.speed, state.ego.heading, params.ego_radius);
  return best;
}

std::vector<ExoState> step_exo(const WorldState& state, std::span<const Vec2> noise, const DrivingParams& params) {
  if (noise.size() != state.exo.size()) throw std::invalid_argument("one noise draw per exo-agent required");
  std::vector<ExoState> out(state.exo.size());
  for (std::size_t i = 0; i < state.exo.size(); ++i) {
    const ExoState& cur = state.exo[i];
    const AgentContext& ctx = (*state.agents)[i];
    const Polyline& path = ctx.paths[state.intentions[i]];

    const double ttc = exo_forward_ttc(state, i, params);
    double speed;
    if (ttc < params.exo_ttc_threshold) {
      speed = std::max(cur.speed * ttc / params.exo_ttc_threshold, cur.speed - params.exo_max_decel * params.dt);
    } else if (cur.speed < ctx.preferred_speed) {
      speed = std::min(ctx.preferred_speed, cur.speed + params.exo_accel * params.dt);
    } else {
      speed = std::max(ctx.preferred_speed, cur.speed - params.exo_max_decel * params.dt);
    }
    speed = std::max(0.0, speed);

    const double s = path.project(cur.position).arc + speed * params.dt;
    out[i].speed = speed;
    out[i].position = path.point_at(s) + noise[i];
    out[i].heading = path.heading_at(s);
  }
  return out;
}

double constant_velocity_ttc(Vec2 p1, Vec2 v1, Vec2 p2, Vec2 v2, double reach) {
  const Vec2 d = p2 - p1;
  const Vec2 w = v2 - v1;
  const double c = d.squared_norm() - reach * reach;
  if (c <= 0.0) return 0.0;
  const double a = w.squared_norm();
  const double b = 2.0 * d.dot(w);
  if (a <= 0.0 || b >= 0.0) return std::numeric_limits<double>::infinity();
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  return (-b - std::sqrt(disc)) / (2.0 * a);
}

bool is_collision(const WorldState& state, const DrivingParams& params) {
  const double reach = params.ego_radius + params.exo_radius;
  const double reach2 = reach * reach;
  for (const auto& e : state.exo) {
    if ((e.position - state.ego.position).squared_norm() <= reach2) return true;
  }
  return false;
}

double reward(const WorldState& state, Action action, const DrivingParams& params) {
  const double v = state.ego.speed;
  double r = (v - params.v_max) / params.v_max;
  if (is_collision(state, params)) r += -params.collision_scale * (v * v + params.collision_offset);
  if (action != Action::kCur) r += -params.smoothness_penalty;
  return r;
}

Observation observe(const WorldState& state) { return Observation{state.ego, state.exo}; }

namespace {

std::int32_t bin(double value, double width) { return static_cast<std::int32_t>(std::floor(value / width)); }

ObservationKey key_of(const EgoState& ego, const std::vector<ExoState>& exo, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("observation cell must be positive");
  constexpr double kSpeedBin = 0.5;
  ObservationKey key;
  key.bins.reserve(3 * (exo.size() + 1));
  key.bins.push_back(bin(ego.position.x, cell));
  key.bins.push_back(bin(ego.position.y, cell));
  key.bins.push_back(bin(ego.speed, kSpeedBin));
  for (const auto& e : exo) {
    key.bins.push_back(bin(e.position.x, cell));
    key.bins.push_back(bin(e.position.y, cell));
    key.bins.push_back(bin(e.speed, kSpeedBin));
  }
  return key;
}

}  // namespace

ObservationKey observation_key(const Observation& z, double cell) { return key_of(z.ego, z.exo, cell); }

ObservationKey observation_key(const WorldState& s, double cell) { return key_of(s.ego, s.exo, cell); }

WorldState make_state(const Observation& z, std::vector<int> intentions, std::shared_ptr<const AgentContexts> agents) {
  WorldState s{z.ego, z.exo, std::move(intentions), std::move(agents)};
  return s;
}

StepOutcome<WorldState, Observation> DrivingModel::step_with_noise(const WorldState& s, Action action,
                                                                   std::span<const Vec2> noise) const {
  StepOutcome<WorldState, Observation> out;
  const EgoStepResult ego = step_ego(s.ego, action, params_);
  out.next.exo = step_exo(s, noise, params_);
  out.next.ego = ego.ego;
  out.next.intentions = s.intentions;
  out.next.agents = s.agents;
  out.reward = reward(out.next, action, params_);
  out.terminal = ego.path_exhausted || is_collision(out.next, params_);
  out.observation = observe(out.next);
  return out;
}

namespace {

std::vector<Vec2> draw_noise(std::size_t agents, ScenarioStream& stream, double sigma) {
  std::vector<Vec2> noise(agents);
  for (auto& n : noise) {
    const double nx = stream.next_gaussian();
    const double ny = stream.next_gaussian();
    n = Vec2{nx, ny} * sigma;
  }
  return noise;
}

}  // namespace

StepOutcome<WorldState, Observation> DrivingModel::step(const WorldState& s, int action, ScenarioStream stream) const {
  const auto noise = draw_noise(s.exo.size(), stream, params_.exo_noise_sigma);
  return step_with_noise(s, action_from_index(action), noise);
}

DrivingModel::Advance DrivingModel::advance(WorldState& s, Action action, ScenarioStream stream) const {
  const auto noise = draw_noise(s.exo.size(), stream, params_.exo_noise_sigma);
  const EgoStepResult ego = step_ego(s.ego, action, params_);
  s.exo = step_exo(s, noise, params_);
  s.ego = ego.ego;
  Advance out;
  out.reward = reward(s, action, params_);
  out.terminal = ego.path_exhausted || is_collision(s, params_);
  return out;
}

}  // namespace leader
