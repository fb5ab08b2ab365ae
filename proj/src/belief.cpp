#include "leader/belief.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace leader {

std::vector<std::size_t> IntentionDistribution::shape() const {
  std::vector<std::size_t> s;
  s.reserve(probs_.size());
  for (const auto& p : probs_) s.push_back(p.size());
  return s;
}

bool IntentionDistribution::same_shape(const IntentionDistribution& other) const {
  return shape() == other.shape();
}

double IntentionDistribution::probability(std::span<const int> intentions) const {
  if (intentions.size() != probs_.size()) throw std::invalid_argument("assignment size does not match agent count");
  double p = 1.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) p *= probs_[i].at(static_cast<std::size_t>(intentions[i]));
  return p;
}

bool IntentionDistribution::is_normalized(double tol) const {
  for (const auto& p : probs_) {
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

double IntentionDistribution::min_entry() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : probs_) {
    for (double v : p) m = std::min(m, v);
  }
  return m;
}

std::vector<double> IntentionDistribution::serialize() const {
  std::vector<double> flat;
  flat.push_back(static_cast<double>(probs_.size()));
  for (const auto& p : probs_) flat.push_back(static_cast<double>(p.size()));
  for (const auto& p : probs_) flat.insert(flat.end(), p.begin(), p.end());
  return flat;
}

IntentionDistribution IntentionDistribution::deserialize(std::span<const double> flat) {
  if (flat.empty()) throw std::invalid_argument("empty distribution record");
  const auto agents = static_cast<std::size_t>(flat[0]);
  if (flat.size() < 1 + agents) throw std::invalid_argument("truncated distribution header");
  std::vector<std::vector<double>> probs(agents);
  std::size_t offset = 1 + agents;
  for (std::size_t i = 0; i < agents; ++i) {
    const auto m = static_cast<std::size_t>(flat[1 + i]);
    if (offset + m > flat.size()) throw std::invalid_argument("truncated distribution body");
    probs[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                    flat.begin() + static_cast<std::ptrdiff_t>(offset + m));
    offset += m;
  }
  if (offset != flat.size()) throw std::invalid_argument("trailing values in distribution record");
  return IntentionDistribution(std::move(probs));
}

IntentionDistribution init_belief(std::span<const int> paths_per_agent) {
  std::vector<std::vector<double>> probs;
  probs.reserve(paths_per_agent.size());
  for (std::size_t i = 0; i < paths_per_agent.size(); ++i) {
    const int m = paths_per_agent[i];
    if (m < 1) throw std::invalid_argument("agent " + std::to_string(i) + " has no candidate path");
    probs.emplace_back(static_cast<std::size_t>(m), 1.0 / m);
  }
  return IntentionDistribution(std::move(probs));
}

std::vector<double> apply_floor(std::span<const double> probs, double floor) {
  const std::size_t n = probs.size();
  if (floor * static_cast<double>(n) > 1.0) throw std::invalid_argument("floor too large for block size");
  std::vector<double> out(probs.begin(), probs.end());
  std::vector<bool> pinned(n, false);
  while (true) {
    std::size_t pinned_count = 0;
    double free_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pinned[j]) {
        ++pinned_count;
      } else {
        free_mass += probs[j];
      }
    }
    const double budget = 1.0 - floor * static_cast<double>(pinned_count);
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (pinned[j]) {
        out[j] = floor;
        continue;
      }
      out[j] = free_mass > 0.0 ? probs[j] * budget / free_mass : budget / static_cast<double>(n - pinned_count);
      if (out[j] < floor) {
        pinned[j] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

IntentionDistribution apply_floor(const IntentionDistribution& dist, double floor) {
  std::vector<std::vector<double>> probs;
  probs.reserve(dist.agent_count());
  for (const auto& p : dist.blocks()) probs.push_back(apply_floor(p, floor));
  return IntentionDistribution(std::move(probs));
}

Vec2 predict_on_path(const ExoState& prev, double next_speed, const Polyline& path, double dt) {
  return path.point_at(path.project(prev.position).arc + next_speed * dt);
}

std::vector<double> bayes_posterior(std::span<const double> prior, std::span<const double> likelihood) {
  if (prior.size() != likelihood.size()) throw std::invalid_argument("prior and likelihood sizes differ");
  std::vector<double> post(prior.size());
  double total = 0.0;
  for (std::size_t m = 0; m < prior.size(); ++m) {
    post[m] = prior[m] * likelihood[m];
    total += post[m];
  }
  if (!(total > 0.0) || !std::isfinite(total)) return {prior.begin(), prior.end()};
  for (double& p : post) p /= total;
  return post;
}

IntentionDistribution update_belief(const IntentionDistribution& b, const Observation& z_prev, const Observation& z,
                                    const AgentContexts& agents, const BeliefUpdateParams& params) {
  const std::size_t n = b.agent_count();
  if (z_prev.exo.size() != n || z.exo.size() != n || agents.size() != n) {
    throw std::invalid_argument("belief, observations and agent contexts disagree on agent count");
  }
  const double inv_two_var = 1.0 / (2.0 * params.obs_sigma * params.obs_sigma);
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& paths = agents[i].paths;
    if (paths.size() != b.intention_count(i)) throw std::invalid_argument("agent path count differs from belief");
    // Likelihoods are evaluated relative to the best intention so a far-off
    // observation does not underflow every entry at once.
    std::vector<double> sq(paths.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < paths.size(); ++m) {
      const Vec2 pred = predict_on_path(z_prev.exo[i], z.exo[i].speed, paths[m], params.dt);
      sq[m] = (z.exo[i].position - pred).squared_norm() * inv_two_var;
      best = std::min(best, sq[m]);
    }
    std::vector<double> like(paths.size());
    for (std::size_t m = 0; m < paths.size(); ++m) like[m] = std::exp(-(sq[m] - best));
    out.push_back(bayes_posterior(b.agent(i), like));
  }
  return IntentionDistribution(std::move(out));
}

int sample_categorical(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    cumulative += probs[m];
    if (u < cumulative) return static_cast<int>(m);
  }
  // Rounding can leave the total just under one; fall back to the last
  // intention with positive mass.
  for (std::size_t m = probs.size(); m-- > 0;) {
    if (probs[m] > 0.0) return static_cast<int>(m);
  }
  return 0;
}

StateParticle sample_state(const IntentionDistribution& dist, const Observation& z, ScenarioStream& stream) {
  StateParticle p{z, {}};
  p.intentions.reserve(dist.agent_count());
  for (std::size_t i = 0; i < dist.agent_count(); ++i) {
    p.intentions.push_back(sample_categorical(dist.agent(i), stream.next_uniform()));
  }
  return p;
}

void check_support(const IntentionDistribution& q, double floor) {
  for (std::size_t i = 0; i < q.agent_count(); ++i) {
    for (std::size_t m = 0; m < q.intention_count(i); ++m) {
      // Tolerate rounding from renormalisation.
      if (!(q.at(i, m) >= floor * (1.0 - 1e-9))) {
        throw SupportViolation("importance distribution entry (" + std::to_string(i) + ", " + std::to_string(m) +
                               ") = " + std::to_string(q.at(i, m)) + " is below the support floor");
      }
    }
  }
}

double importance_weight(const IntentionDistribution& b, const IntentionDistribution& q,
                         std::span<const int> intentions) {
  if (!b.same_shape(q)) throw std::invalid_argument("belief and importance distribution shapes differ");
  check_support(q);
  double w = 1.0;
  for (std::size_t i = 0; i < b.agent_count(); ++i) {
    const auto m = static_cast<std::size_t>(intentions[i]);
    w *= b.at(i, m) / q.at(i, m);
  }
  return w;
}

}  // namespace leader
