#pragma once

#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "leader/stream.h"

namespace leader {

/// Discount, look-ahead depth and action count of a POMDP.
struct PomdpSpec {
  double gamma = 0.95;
  int horizon = 10;
  int action_count = 3;

  void validate() const;
};

/// Sum of gamma^t * rewards[t]. Throws std::invalid_argument unless gamma is in [0, 1).
double discounted_return(std::span<const double> rewards, double gamma);

template <typename State, typename Observation>
struct StepOutcome {
  State next;
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
};

template <typename State, typename Observation>
struct TrajectoryStep {
  int action = 0;
  State next;
  Observation observation;
};

template <typename State, typename Observation>
struct Trajectory {
  State initial_state;
  std::vector<TrajectoryStep<State, Observation>> steps;
  std::vector<double> rewards;
  bool terminated = false;
};

/// A generative model usable by the search: one transition draws every random
/// number it needs from the supplied stream.
template <typename M>
concept GenerativeModel = requires(const M& model, const typename M::State& s, int action,
                                   ScenarioStream stream) {
  typename M::Observation;
  {
    model.step(s, action, stream)
  } -> std::same_as<StepOutcome<typename M::State, typename M::Observation>>;
};

/// Rolls `policy` forward from `start` for at most `horizon` steps. The
/// transition out of depth t consumes `stream.at_depth(t)`, so equal streams
/// give bit-identical trajectories. `policy` receives the trajectory so far.
template <GenerativeModel M, typename Policy>
Trajectory<typename M::State, typename M::Observation> sample_trajectory(
    const M& model, const typename M::State& start, Policy&& policy, const ScenarioStream& stream,
    int horizon) {
  Trajectory<typename M::State, typename M::Observation> traj{start, {}, {}, false};
  const typename M::State* current = &traj.initial_state;
  for (int t = 0; t < horizon; ++t) {
    const int action = policy(traj);
    auto outcome = model.step(*current, action, stream.at_depth(t));
    traj.rewards.push_back(outcome.reward);
    traj.steps.push_back({action, std::move(outcome.next), std::move(outcome.observation)});
    current = &traj.steps.back().next;
    if (outcome.terminal) {
      traj.terminated = true;
      break;
    }
  }
  return traj;
}

}  // namespace leader
