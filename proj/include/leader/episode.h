#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leader/belief.h"
#include "leader/driving_model.h"
#include "leader/lane_graph.h"

namespace leader {

/// Initial placement of one exo-agent: either at an arc offset along a named
/// map route or at an explicit position and heading.
struct AgentSpawn {
  std::string route;
  double offset = 0.0;
  std::optional<Vec2> position;
  double heading = 0.0;
  double speed = 0.0;
  double preferred_speed = 4.0;
  std::optional<int> intention;   // fixed true intention; otherwise drawn from the prior
  std::vector<double> prior;      // intention probabilities; empty means uniform
};

struct ScenarioSpec {
  std::string name;
  std::shared_ptr<const LaneGraph> map;
  std::string ego_route;
  double ego_offset = 0.0;
  double ego_speed = 0.0;
  std::vector<AgentSpawn> agents;
  int max_steps = 60;
  double offset_jitter = 0.0;  // uniform spawn perturbation along the lane, metres
  double speed_jitter = 0.0;   // uniform perturbation of initial speeds

  /// JSON scenario; the map path is resolved relative to the scenario file.
  static ScenarioSpec load(const std::filesystem::path& file);
  static ScenarioSpec from_json_text(const std::string& text, const std::filesystem::path& base_dir);
};

struct EpisodeOptions {
  PathExtraction extraction;
  BeliefUpdateParams belief;
  double repath_distance = 10.0;  // agents with less intended path left get new candidate paths
  bool perturb = true;
};

/// Closed-loop simulation of one scenario with belief tracking. Agents that
/// run short of path are re-pathed from the lane graph with a uniform belief
/// over their new candidates; agents that leave the map or reach a dead end
/// are removed.
class Episode {
 public:
  Episode(const ScenarioSpec& spec, const DrivingModel& model, std::uint64_t seed, EpisodeOptions options = {});

  struct StepResult {
    double reward = 0.0;
    bool collision = false;
    bool terminal = false;
  };

  const WorldState& state() const { return state_; }
  Observation observation() const { return observe(state_); }
  const IntentionDistribution& belief() const { return belief_; }
  const std::shared_ptr<const AgentContexts>& agents() const { return state_.agents; }
  int step_index() const { return step_; }
  bool done() const { return done_; }
  bool collided() const { return collided_; }
  double travelled() const { return travelled_; }
  std::uint64_t seed() const { return seed_; }
  const ScenarioSpec& spec() const { return spec_; }

  StepResult step(Action action);

 private:
  void maintain_agents();

  ScenarioSpec spec_;
  const DrivingModel& model_;
  EpisodeOptions options_;
  std::uint64_t seed_;
  ScenarioStream stream_;
  WorldState state_;
  IntentionDistribution belief_;
  int step_ = 0;
  bool done_ = false;
  bool collided_ = false;
  double travelled_ = 0.0;
};

}  // namespace leader
