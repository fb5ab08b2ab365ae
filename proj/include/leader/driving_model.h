#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "leader/geometry.h"
#include "leader/pomdp.h"

namespace leader {

enum class Action : int { kAcc = 0, kCur = 1, kDec = 2 };
inline constexpr int kActionCount = 3;
const char* action_name(Action a);
Action action_from_index(int index);

/// Kinematic and reward constants of the urban-driving model.
struct DrivingParams {
  double dt = 1.0 / 3.0;
  double v_max = 6.0;
  double acceleration = 3.0;         // magnitude for ACC and DEC
  double wheelbase = 2.5;
  double max_steer = 0.7;            // radians
  double ego_radius = 1.5;
  double exo_radius = 1.0;
  double exo_noise_sigma = 0.05;     // std-dev of the position noise per axis
  double exo_ttc_threshold = 3.0;    // seconds; braking starts below this
  double exo_max_decel = 4.0;
  double exo_accel = 2.0;
  double path_end_tolerance = 0.5;   // metres of reference path left at which the episode ends
  double collision_scale = 20.0;
  double collision_offset = 0.5;
  double smoothness_penalty = 0.1;
};

struct EgoState {
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;
  std::shared_ptr<const Polyline> path;
};

struct ExoState {
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;

  friend bool operator==(const ExoState&, const ExoState&) = default;
};

/// Per-agent knowledge that stays fixed while planning: the candidate paths
/// (intentions) and the speed the agent settles at when unobstructed.
struct AgentContext {
  std::vector<Polyline> paths;
  double preferred_speed = 0.0;
};
using AgentContexts = std::vector<AgentContext>;

struct Observation {
  EgoState ego;
  std::vector<ExoState> exo;
};

struct WorldState {
  EgoState ego;
  std::vector<ExoState> exo;
  std::vector<int> intentions;
  std::shared_ptr<const AgentContexts> agents;

  std::size_t agent_count() const { return exo.size(); }
  const Polyline& intended_path(std::size_t i) const { return (*agents)[i].paths[intentions[i]]; }
  /// Throws std::invalid_argument when sizes or intention indices are inconsistent.
  void validate() const;
};

struct EgoStepResult {
  EgoState ego;
  bool path_exhausted = false;
  double steering = 0.0;
};

/// Pure-pursuit steering along the reference path plus kinematic bicycle
/// integration; the speed is clamped to [0, v_max].
EgoStepResult step_ego(const EgoState& ego, Action action, const DrivingParams& params);

/// Exo-agents follow their intended paths at the preferred speed and brake in
/// proportion to their forward time-to-collision when it drops under the
/// threshold. `noise` holds one already-scaled 2D position offset per agent.
std::vector<ExoState> step_exo(const WorldState& state, std::span<const Vec2> noise, const DrivingParams& params);

/// Forward time-to-collision of agent `i` against every other agent and the ego.
double exo_forward_ttc(const WorldState& state, std::size_t i, const DrivingParams& params);

/// Earliest t >= 0 at which two discs moving with constant velocities come
/// within `reach` of each other; +inf if they never do.
double constant_velocity_ttc(Vec2 p1, Vec2 v1, Vec2 p2, Vec2 v2, double reach);

bool is_collision(const WorldState& state, const DrivingParams& params);
double reward(const WorldState& state, Action action, const DrivingParams& params);

Observation observe(const WorldState& state);

/// Observation discretised for tree branching: every position is binned to a
/// square grid of side `cell`, every speed to 0.5 m/s bins.
struct ObservationKey {
  std::vector<std::int32_t> bins;
  friend auto operator<=>(const ObservationKey&, const ObservationKey&) = default;
};
ObservationKey observation_key(const Observation& z, double cell);
/// Key of observe(s) without materialising the observation.
ObservationKey observation_key(const WorldState& s, double cell);

/// Builds a full state from an observation and an intention assignment.
WorldState make_state(const Observation& z, std::vector<int> intentions,
                      std::shared_ptr<const AgentContexts> agents);

/// The urban-driving POMDP as a generative model. One transition draws two
/// Gaussians per exo-agent from the stream, in agent order.
class DrivingModel {
 public:
  using State = WorldState;
  using Observation = leader::Observation;

  explicit DrivingModel(DrivingParams params = {}) : params_(params) {}

  const DrivingParams& params() const { return params_; }

  StepOutcome<WorldState, leader::Observation> step(const WorldState& s, int action,
                                                    ScenarioStream stream) const;

  /// Transition with explicit (already scaled) noise.
  StepOutcome<WorldState, leader::Observation> step_with_noise(const WorldState& s, Action action,
                                                               std::span<const Vec2> noise) const;

  struct Advance {
    double reward = 0.0;
    bool terminal = false;
  };
  /// In-place form of step() without building the observation. Consumes the
  /// same draws from `stream` as step().
  Advance advance(WorldState& s, Action action, ScenarioStream stream) const;

 private:
  DrivingParams params_;
};

}  // namespace leader
