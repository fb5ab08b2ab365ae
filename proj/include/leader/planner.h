#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "leader/belief.h"
#include "leader/driving_model.h"

namespace leader {

struct PlannerConfig {
  int scenarios = 100;        // K root scenarios
  int horizon = 10;           // maximum tree depth H
  int max_expansions = 3000;
  double gamma = 0.95;
  double lambda = 0.01;       // regularisation per policy-tree node
  double xi = 0.95;           // target gap fraction for excess uncertainty
  double obs_cell = 1.0;      // observation grid size in metres
  double rollout_ttc = 2.0;   // default policy brakes below this time-to-collision
  double gap_tolerance = 1e-6;
  bool importance_weights = true;  // false: plain search, scenarios drawn from b with unit weight

  void validate() const;
};

/// Mean of weight * return over the entries. Throws on an empty list.
double evaluate_policy_value(std::span<const std::pair<double, double>> weighted_returns);

/// Reactive default policy: DEC if any agent is within the TTC threshold,
/// otherwise ACC below v_max, otherwise CUR.
Action reactive_action(const WorldState& s, const DrivingParams& params, double ttc_threshold);

struct ActionStatistics {
  double value = 0.0;   // importance-weighted value of the chosen sub-policy
  double lower = 0.0;
  double upper = 0.0;
  double regularized = 0.0;
  int scenario_count = 0;
  bool expanded = false;
};

struct PlanResult {
  Action action = Action::kCur;
  double value_estimate = 0.0;
  std::array<ActionStatistics, kActionCount> root{};
  double root_lower = 0.0;
  double root_upper = 0.0;
  int expansions = 0;
  int node_count = 0;
  std::vector<double> scenario_weights;
};

/// One determinised root scenario.
struct Scenario {
  StateParticle particle;
  double weight = 1.0;
  ScenarioStream stream{0};
};

/// Sparse belief tree over a fixed scenario set. Every scenario contributes
/// (weight / K) * gamma^depth * reward to the node values it passes through,
/// so the root values are importance-sampling estimates.
class BeliefTree {
 public:
  BeliefTree(const DrivingModel& model, const PlannerConfig& config, std::vector<Scenario> scenarios,
             std::shared_ptr<const AgentContexts> agents);

  int root() const { return 0; }
  std::size_t node_count() const { return vnodes_.size(); }
  int expansions() const { return expansions_; }

  bool expanded(int vnode) const { return vnodes_[vnode].expanded; }
  int depth(int vnode) const { return vnodes_[vnode].depth; }
  double lower(int vnode) const { return vnodes_[vnode].lower; }
  double upper(int vnode) const { return vnodes_[vnode].upper; }
  double regularized(int vnode) const { return vnodes_[vnode].mu; }
  double default_value(int vnode) const { return vnodes_[vnode].default_value; }
  /// Sum over the node's scenarios of weight / K.
  double weight(int vnode) const { return vnodes_[vnode].weight; }
  std::size_t scenario_count(int vnode) const { return vnodes_[vnode].particles.size(); }
  std::vector<int> children(int vnode, Action a) const;

  /// Expands all actions below a leaf; child scenarios are grouped by observation key.
  void expand(int vnode);
  /// One heuristic descent from the root along maximal upper bound and maximal
  /// weighted excess uncertainty, followed by a backup. Returns false when it
  /// expanded nothing.
  bool trial();
  /// Runs trials until the gap closes or the expansion budget is spent.
  void search();

  /// Value of taking `a` at `vnode` and then following the default policy.
  double depth_one_value(int vnode, Action a) const;
  /// Value of the policy that maximises the regularised bound, rooted at
  /// taking `a` at `vnode`.
  double policy_value(int vnode, Action a) const;
  double policy_value(int vnode) const;
  ActionStatistics action_statistics(int vnode, Action a) const;

  /// Line-delimited JSON records (depth, action, observation key, bounds,
  /// scenario count) of nodes up to `max_depth`.
  void dump(std::ostream& out, int max_depth) const;

 private:
  struct Particle {
    int scenario = 0;
    WorldState state;
    bool terminal = false;
  };
  struct VNode {
    int depth = 0;
    int parent = -1;   // q-node index
    ObservationKey key;
    std::vector<Particle> particles;
    double weight = 0.0;
    double default_value = 0.0;
    double initial_upper = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double mu = 0.0;
    bool expanded = false;
    std::array<int, kActionCount> qnodes{-1, -1, -1};
  };
  struct QNode {
    int parent = 0;
    Action action = Action::kCur;
    double step_reward = 0.0;
    std::vector<int> children;
    double lower = 0.0;
    double upper = 0.0;
    double mu = 0.0;
  };

  int make_vnode(int depth, int parent, ObservationKey key, std::vector<Particle> particles);
  double scale(int scenario, int depth) const;
  double rollout(const Particle& p, int depth) const;
  double upper_bound(const Particle& p, int depth) const;
  double gap(int vnode) const { return vnodes_[vnode].upper - vnodes_[vnode].lower; }
  double excess_uncertainty(int vnode) const;
  void update(int vnode);
  void update_q(int qnode);
  void backup(int vnode);
  int best_regularized_action(int vnode) const;

  const DrivingModel& model_;
  PlannerConfig config_;
  std::vector<Scenario> scenarios_;
  std::shared_ptr<const AgentContexts> agents_;
  std::vector<double> discount_;
  std::vector<VNode> vnodes_;
  std::vector<QNode> qnodes_;
  int expansions_ = 0;
};

/// Draws the root scenarios: from q with weights b/q, or from b with unit
/// weights when importance weighting is off.
std::vector<Scenario> sample_scenarios(const IntentionDistribution& b, const Observation& z,
                                       const IntentionDistribution& q, const PlannerConfig& config,
                                       std::uint64_t seed);

/// Importance-sampling belief-tree search. Returns the root action that
/// maximises the regularised lower bound together with the importance-weighted
/// value estimate of the resulting policy. Throws SupportViolation before any
/// search when q is below the floor.
PlanResult plan(const DrivingModel& model, const IntentionDistribution& b, const Observation& z,
                const IntentionDistribution& q, std::shared_ptr<const AgentContexts> agents,
                const PlannerConfig& config, std::uint64_t seed, std::ostream* tree_dump = nullptr,
                int dump_depth = 2);

}  // namespace leader
