#include "leader/planner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace leader {

void PlannerConfig::validate() const {
  if (scenarios < 1) throw std::invalid_argument("planner needs at least one scenario");
  if (horizon < 1) throw std::invalid_argument("planner horizon must be at least 1");
  if (max_expansions < 1) throw std::invalid_argument("planner needs at least one expansion");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(obs_cell > 0.0)) throw std::invalid_argument("observation cell must be positive");
}

double evaluate_policy_value(std::span<const std::pair<double, double>> weighted_returns) {
  if (weighted_returns.empty()) throw std::invalid_argument("policy value needs at least one trajectory");
  double total = 0.0;
  for (const auto& [w, v] : weighted_returns) total += w * v;
  return total / static_cast<double>(weighted_returns.size());
}

Action reactive_action(const WorldState& s, const DrivingParams& params, double ttc_threshold) {
  const Vec2 ego_velocity = unit_from_angle(s.ego.heading) * s.ego.speed;
  const double reach = params.ego_radius + params.exo_radius;
  for (const auto& e : s.exo) {
    const double ttc =
        constant_velocity_ttc(s.ego.position, ego_velocity, e.position, unit_from_angle(e.heading) * e.speed, reach);
    if (ttc < ttc_threshold) return Action::kDec;
  }
  return s.ego.speed < params.v_max ? Action::kAcc : Action::kCur;
}

std::vector<Scenario> sample_scenarios(const IntentionDistribution& b, const Observation& z,
                                       const IntentionDistribution& q, const PlannerConfig& config,
                                       std::uint64_t seed) {
  const IntentionDistribution& source = config.importance_weights ? q : b;
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(config.scenarios));
  for (int k = 0; k < config.scenarios; ++k) {
    Scenario sc;
    sc.stream = ScenarioStream::for_scenario(seed, static_cast<std::uint64_t>(k));
    ScenarioStream draw = sc.stream;
    sc.particle = sample_state(source, z, draw);
    if (config.importance_weights) {
      double w = 1.0;
      for (std::size_t i = 0; i < b.agent_count(); ++i) {
        const auto m = static_cast<std::size_t>(sc.particle.intentions[i]);
        w *= b.at(i, m) / q.at(i, m);
      }
      sc.weight = w;
    }
    out.push_back(std::move(sc));
  }
  return out;
}

BeliefTree::BeliefTree(const DrivingModel& model, const PlannerConfig& config, std::vector<Scenario> scenarios,
                       std::shared_ptr<const AgentContexts> agents)
    : model_(model), config_(config), scenarios_(std::move(scenarios)), agents_(std::move(agents)) {
  config_.validate();
  discount_.resize(static_cast<std::size_t>(config_.horizon) + 1);
  discount_[0] = 1.0;
  for (std::size_t d = 1; d < discount_.size(); ++d) discount_[d] = discount_[d - 1] * config_.gamma;

  std::vector<Particle> root;
  root.reserve(scenarios_.size());
  for (std::size_t k = 0; k < scenarios_.size(); ++k) {
    const auto& sc = scenarios_[k];
    if (!(sc.weight >= 0.0) || !std::isfinite(sc.weight)) throw std::invalid_argument("scenario weight must be finite and non-negative");
    root.push_back({static_cast<int>(k), make_state(sc.particle.observed, sc.particle.intentions, agents_), false});
  }
  ObservationKey key;
  if (!root.empty()) key = observation_key(root.front().state, config_.obs_cell);
  make_vnode(0, -1, std::move(key), std::move(root));
}

double BeliefTree::scale(int scenario, int depth) const {
  return scenarios_[static_cast<std::size_t>(scenario)].weight / static_cast<double>(scenarios_.size()) *
         discount_[static_cast<std::size_t>(depth)];
}

double BeliefTree::rollout(const Particle& p, int depth) const {
  if (p.terminal) return 0.0;
  WorldState s = p.state;
  const ScenarioStream& stream = scenarios_[static_cast<std::size_t>(p.scenario)].stream;
  double total = 0.0;
  double discount = 1.0;
  for (int t = depth; t < config_.horizon; ++t) {
    const Action a = reactive_action(s, model_.params(), config_.rollout_ttc);
    const auto adv = model_.advance(s, a, stream.at_depth(t));
    total += discount * adv.reward;
    discount *= config_.gamma;
    if (adv.terminal) break;
  }
  return total;
}

double BeliefTree::upper_bound(const Particle& p, int depth) const {
  if (p.terminal) return 0.0;
  // No collisions, no smoothness penalty, fastest admissible speed profile;
  // rewards stop once the reference path could have been used up.
  const DrivingParams& prm = model_.params();
  const Polyline& path = *p.state.ego.path;
  const double remaining = path.length() - path.project(p.state.ego.position).arc - prm.path_end_tolerance + 1.0;
  double v = p.state.ego.speed;
  double travelled = 0.0;
  double total = 0.0;
  double discount = 1.0;
  for (int t = depth; t < config_.horizon; ++t) {
    v = std::min(prm.v_max, v + prm.acceleration * prm.dt);
    total += discount * (v - prm.v_max) / prm.v_max;
    discount *= config_.gamma;
    travelled += v * prm.dt;
    if (travelled >= remaining) break;
  }
  return total;
}

int BeliefTree::make_vnode(int depth, int parent, ObservationKey key, std::vector<Particle> particles) {
  VNode node;
  node.depth = depth;
  node.parent = parent;
  node.key = std::move(key);
  for (const auto& p : particles) {
    const double c = scale(p.scenario, depth);
    const double lo = rollout(p, depth);
    const double hi = std::max(lo, upper_bound(p, depth));
    node.weight += scenarios_[static_cast<std::size_t>(p.scenario)].weight / static_cast<double>(scenarios_.size());
    node.default_value += c * lo;
    node.initial_upper += c * hi;
  }
  node.particles = std::move(particles);
  node.lower = node.default_value;
  node.upper = node.initial_upper;
  node.mu = node.default_value;
  vnodes_.push_back(std::move(node));
  return static_cast<int>(vnodes_.size()) - 1;
}

void BeliefTree::expand(int vnode) {
  if (vnodes_[vnode].expanded || vnodes_[vnode].depth >= config_.horizon) return;
  const int depth = vnodes_[vnode].depth;
  for (int ai = 0; ai < kActionCount; ++ai) {
    const Action a = static_cast<Action>(ai);
    std::map<ObservationKey, std::vector<Particle>> groups;
    double step_reward = 0.0;
    for (const Particle& p : vnodes_[vnode].particles) {
      Particle next = p;
      if (!p.terminal) {
        const auto& stream = scenarios_[static_cast<std::size_t>(p.scenario)].stream;
        const auto adv = model_.advance(next.state, a, stream.at_depth(depth));
        step_reward += scale(p.scenario, depth) * adv.reward;
        next.terminal = adv.terminal;
      }
      groups[observation_key(next.state, config_.obs_cell)].push_back(std::move(next));
    }
    QNode q;
    q.parent = vnode;
    q.action = a;
    q.step_reward = step_reward;
    const int qi = static_cast<int>(qnodes_.size());
    qnodes_.push_back(std::move(q));
    for (auto& [key, particles] : groups) {
      const int child = make_vnode(depth + 1, qi, key, std::move(particles));
      qnodes_[static_cast<std::size_t>(qi)].children.push_back(child);
    }
    vnodes_[vnode].qnodes[static_cast<std::size_t>(ai)] = qi;
    update_q(qi);
  }
  vnodes_[vnode].expanded = true;
  ++expansions_;
  update(vnode);
}

void BeliefTree::update_q(int qi) {
  QNode& q = qnodes_[static_cast<std::size_t>(qi)];
  double lo = q.step_reward;
  double hi = q.step_reward;
  double mu = q.step_reward - config_.lambda;
  for (int c : q.children) {
    lo += vnodes_[c].lower;
    hi += vnodes_[c].upper;
    mu += vnodes_[c].mu;
  }
  q.lower = lo;
  q.upper = hi;
  q.mu = mu;
}

void BeliefTree::update(int vi) {
  VNode& v = vnodes_[vi];
  if (!v.expanded) {
    v.lower = v.default_value;
    v.upper = v.initial_upper;
    v.mu = v.default_value;
    return;
  }
  double best_lo = -std::numeric_limits<double>::infinity();
  double best_hi = -std::numeric_limits<double>::infinity();
  double best_mu = -std::numeric_limits<double>::infinity();
  for (int qi : v.qnodes) {
    const QNode& q = qnodes_[static_cast<std::size_t>(qi)];
    best_lo = std::max(best_lo, q.lower);
    best_hi = std::max(best_hi, q.upper);
    best_mu = std::max(best_mu, q.mu);
  }
  v.lower = std::max(v.default_value, best_lo);
  v.upper = std::max(v.lower, std::min(v.initial_upper, best_hi));
  v.mu = std::max(v.default_value, best_mu);
}

void BeliefTree::backup(int vi) {
  while (vi >= 0) {
    update(vi);
    const int qi = vnodes_[vi].parent;
    if (qi < 0) break;
    update_q(qi);
    vi = qnodes_[static_cast<std::size_t>(qi)].parent;
  }
}

double BeliefTree::excess_uncertainty(int vi) const {
  return gap(vi) - config_.xi * vnodes_[vi].weight * gap(root());
}

bool BeliefTree::trial() {
  int cur = root();
  bool expanded_any = false;
  while (vnodes_[cur].depth < config_.horizon) {
    if (!vnodes_[cur].expanded) {
      if (expansions_ >= config_.max_expansions) break;
      expand(cur);
      expanded_any = true;
    }
    int best_q = -1;
    double best_upper = -std::numeric_limits<double>::infinity();
    for (int qi : vnodes_[cur].qnodes) {
      if (qnodes_[static_cast<std::size_t>(qi)].upper > best_upper) {
        best_upper = qnodes_[static_cast<std::size_t>(qi)].upper;
        best_q = qi;
      }
    }
    int next = -1;
    double best_weu = -std::numeric_limits<double>::infinity();
    for (int c : qnodes_[static_cast<std::size_t>(best_q)].children) {
      const double weu = excess_uncertainty(c);
      if (weu > best_weu) {
        best_weu = weu;
        next = c;
      }
    }
    if (next < 0 || best_weu <= 0.0) break;
    cur = next;
  }
  backup(cur);
  return expanded_any;
}

void BeliefTree::search() {
  if (!vnodes_[root()].expanded) expand(root());
  while (expansions_ < config_.max_expansions && gap(root()) > config_.gap_tolerance) {
    if (!trial()) break;
  }
}

std::vector<int> BeliefTree::children(int vi, Action a) const {
  const int qi = vnodes_[vi].qnodes[static_cast<std::size_t>(a)];
  if (qi < 0) return {};
  return qnodes_[static_cast<std::size_t>(qi)].children;
}

int BeliefTree::best_regularized_action(int vi) const {
  int best = 0;
  double best_mu = -std::numeric_limits<double>::infinity();
  for (int ai = 0; ai < kActionCount; ++ai) {
    const double mu = qnodes_[static_cast<std::size_t>(vnodes_[vi].qnodes[static_cast<std::size_t>(ai)])].mu;
    if (mu > best_mu) {
      best_mu = mu;
      best = ai;
    }
  }
  return best;
}

double BeliefTree::depth_one_value(int vi, Action a) const {
  const int qi = vnodes_[vi].qnodes[static_cast<std::size_t>(a)];
  if (qi < 0) throw std::logic_error("node is not expanded");
  const QNode& q = qnodes_[static_cast<std::size_t>(qi)];
  double v = q.step_reward;
  for (int c : q.children) v += vnodes_[c].default_value;
  return v;
}

double BeliefTree::policy_value(int vi, Action a) const {
  const int qi = vnodes_[vi].qnodes[static_cast<std::size_t>(a)];
  if (qi < 0) throw std::logic_error("node is not expanded");
  const QNode& q = qnodes_[static_cast<std::size_t>(qi)];
  double v = q.step_reward;
  for (int c : q.children) v += policy_value(c);
  return v;
}

double BeliefTree::policy_value(int vi) const {
  const VNode& v = vnodes_[vi];
  if (!v.expanded) return v.default_value;
  const int a = best_regularized_action(vi);
  if (v.default_value >= qnodes_[static_cast<std::size_t>(v.qnodes[static_cast<std::size_t>(a)])].mu) {
    return v.default_value;
  }
  return policy_value(vi, static_cast<Action>(a));
}

ActionStatistics BeliefTree::action_statistics(int vi, Action a) const {
  ActionStatistics st;
  const int qi = vnodes_[vi].qnodes[static_cast<std::size_t>(a)];
  if (qi < 0) return st;
  const QNode& q = qnodes_[static_cast<std::size_t>(qi)];
  st.expanded = true;
  st.value = policy_value(vi, a);
  st.lower = q.lower;
  st.upper = q.upper;
  st.regularized = q.mu;
  for (int c : q.children) st.scenario_count += static_cast<int>(vnodes_[c].particles.size());
  return st;
}

void BeliefTree::dump(std::ostream& out, int max_depth) const {
  auto write = [&](auto&& self, int vi, const char* action) -> void {
    const VNode& v = vnodes_[vi];
    if (v.depth > max_depth) return;
    nlohmann::json rec;
    rec["depth"] = v.depth;
    rec["action"] = action ? nlohmann::json(action) : nlohmann::json(nullptr);
    rec["obs"] = v.key.bins;
    rec["lower"] = v.lower;
    rec["upper"] = v.upper;
    rec["scenarios"] = v.particles.size();
    out << rec.dump() << '\n';
    if (!v.expanded) return;
    for (int ai = 0; ai < kActionCount; ++ai) {
      for (int c : qnodes_[static_cast<std::size_t>(v.qnodes[static_cast<std::size_t>(ai)])].children) {
        self(self, c, action_name(static_cast<Action>(ai)));
      }
    }
  };
  write(write, root(), nullptr);
}

PlanResult plan(const DrivingModel& model, const IntentionDistribution& b, const Observation& z,
                const IntentionDistribution& q, std::shared_ptr<const AgentContexts> agents,
                const PlannerConfig& config, std::uint64_t seed, std::ostream* tree_dump, int dump_depth) {
  config.validate();
  if (b.agent_count() != z.exo.size()) throw std::invalid_argument("belief and observation disagree on agent count");
  if (config.importance_weights) {
    if (!b.same_shape(q)) throw std::invalid_argument("belief and importance distribution shapes differ");
    check_support(q);
  }

  auto scenarios = sample_scenarios(b, z, q, config, seed);
  PlanResult result;
  result.scenario_weights.reserve(scenarios.size());
  for (const auto& sc : scenarios) result.scenario_weights.push_back(sc.weight);

  BeliefTree tree(model, config, std::move(scenarios), std::move(agents));
  tree.search();

  for (int ai = 0; ai < kActionCount; ++ai) {
    result.root[static_cast<std::size_t>(ai)] = tree.action_statistics(tree.root(), static_cast<Action>(ai));
  }
  int best = 0;
  for (int ai = 1; ai < kActionCount; ++ai) {
    if (result.root[static_cast<std::size_t>(ai)].regularized > result.root[static_cast<std::size_t>(best)].regularized) best = ai;
  }
  result.action = static_cast<Action>(best);
  result.value_estimate = result.root[static_cast<std::size_t>(best)].value;
  result.root_lower = tree.lower(tree.root());
  result.root_upper = tree.upper(tree.root());
  result.expansions = tree.expansions();
  result.node_count = static_cast<int>(tree.node_count());
  if (tree_dump) tree.dump(*tree_dump, dump_depth);
  return result;
}

}  // namespace leader
