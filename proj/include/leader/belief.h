#pragma once

#include <span>
#include <vector>

#include "leader/driving_model.h"
#include "leader/stream.h"

namespace leader {

/// Minimum probability of every intention in an importance distribution.
inline constexpr double kAttentionFloor = 1e-4;

class SupportViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Factored categorical distribution over each agent's intentions. Used both
/// for the belief b and for the importance distribution (attention) q.
class IntentionDistribution {
 public:
  IntentionDistribution() = default;
  explicit IntentionDistribution(std::vector<std::vector<double>> probs) : probs_(std::move(probs)) {}

  std::size_t agent_count() const { return probs_.size(); }
  std::size_t intention_count(std::size_t agent) const { return probs_[agent].size(); }
  const std::vector<double>& agent(std::size_t i) const { return probs_[i]; }
  std::vector<double>& agent(std::size_t i) { return probs_[i]; }
  double at(std::size_t agent, std::size_t intention) const { return probs_[agent][intention]; }
  const std::vector<std::vector<double>>& blocks() const { return probs_; }

  std::vector<std::size_t> shape() const;
  bool same_shape(const IntentionDistribution& other) const;

  /// Probability of a joint assignment (product over agents).
  double probability(std::span<const int> intentions) const;

  /// True when every block sums to one within `tol` and has no negative entry.
  bool is_normalized(double tol = 1e-9) const;
  double min_entry() const;

  /// Flat record: the agent count, then each agent's intention count, then all
  /// probabilities in agent order.
  std::vector<double> serialize() const;
  static IntentionDistribution deserialize(std::span<const double> flat);

  friend bool operator==(const IntentionDistribution&, const IntentionDistribution&) = default;

 private:
  std::vector<std::vector<double>> probs_;
};

struct StateParticle {
  Observation observed;
  std::vector<int> intentions;
};

/// Uniform distribution over each agent's `paths_per_agent[i]` intentions.
IntentionDistribution init_belief(std::span<const int> paths_per_agent);

/// Sets every entry below `floor` to `floor` and rescales the remaining
/// entries so the block sums to one; repeats until stable. Requires
/// floor * size <= 1.
std::vector<double> apply_floor(std::span<const double> probs, double floor = kAttentionFloor);
IntentionDistribution apply_floor(const IntentionDistribution& dist, double floor = kAttentionFloor);

struct BeliefUpdateParams {
  double obs_sigma = 0.3;  // metres
  double dt = 1.0 / 3.0;
};

/// Predicted position of an agent observed at `prev` that follows `path`
/// without noise and reaches speed `next_speed` on this step.
Vec2 predict_on_path(const ExoState& prev, double next_speed, const Polyline& path, double dt);

/// Bayes update of each agent's intention probabilities from an isotropic
/// Gaussian likelihood of the newly observed position around the noise-free
/// path-following prediction. An agent whose likelihoods all underflow keeps
/// its prior.
IntentionDistribution update_belief(const IntentionDistribution& b, const Observation& z_prev,
                                    const Observation& z, const AgentContexts& agents,
                                    const BeliefUpdateParams& params = {});

/// Bayes rule for a single agent given explicit likelihoods.
std::vector<double> bayes_posterior(std::span<const double> prior, std::span<const double> likelihood);

/// Draws each agent's intention independently by inverse CDF; consumes one
/// uniform per agent.
StateParticle sample_state(const IntentionDistribution& dist, const Observation& z, ScenarioStream& stream);
int sample_categorical(std::span<const double> probs, double u);

/// Throws SupportViolation if any entry of q is below the floor.
void check_support(const IntentionDistribution& q, double floor = kAttentionFloor);

/// Product over agents of b_i(theta_i) / q_i(theta_i).
double importance_weight(const IntentionDistribution& b, const IntentionDistribution& q,
                         std::span<const int> intentions);
inline double importance_weight(const IntentionDistribution& b, const IntentionDistribution& q,
                                const StateParticle& particle) {
  return importance_weight(b, q, particle.intentions);
}

}  // namespace leader
