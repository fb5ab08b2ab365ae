#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "fixtures.h"
#include "leader/attention.h"
#include "leader/planner.h"

using namespace leader;
using testing::crossing_agent_context;
using testing::empty_road;
using testing::exo_at;

namespace {

DrivingParams noise_free() {
  DrivingParams p;
  p.exo_noise_sigma = 0.0;
  return p;
}

Observation observe_state(const WorldState& s) { return Observation{s.ego, s.exo}; }

// Ego heading east at 4 m/s; one agent 5 m ahead and 5 m to the right, heading
// north at 4 m/s. Intention 0 turns west before the ego lane, intention 1
// crosses it.
struct CrossingSetup {
  WorldState base;
  std::shared_ptr<const AgentContexts> agents;
};

CrossingSetup crossing_setup() {
  CrossingSetup c;
  c.base = empty_road(0.0, 4.0);
  auto ctx = std::make_shared<AgentContexts>();
  ctx->push_back(crossing_agent_context({5.0, -5.0}, 1.0, 4.0));
  c.agents = ctx;
  c.base.agents = ctx;
  c.base.exo.push_back(exo_at({5.0, -5.0}, 4.0, M_PI / 2));
  return c;
}

// Exact optimal value of a belief tree over weighted particles with
// observation branching, computed by exhaustive recursion.
double exact_tree_value(const DrivingModel& model, const std::vector<std::pair<double, WorldState>>& particles,
                        const std::vector<bool>& terminal, int depth, int horizon, double gamma, double cell,
                        Action* best_action = nullptr) {
  if (depth == horizon) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int ai = 0; ai < kActionCount; ++ai) {
    const Action a = static_cast<Action>(ai);
    double value = 0.0;
    std::map<ObservationKey, std::pair<std::vector<std::pair<double, WorldState>>, std::vector<bool>>> groups;
    for (std::size_t i = 0; i < particles.size(); ++i) {
      WorldState next = particles[i].second;
      bool done = terminal[i];
      if (!done) {
        const auto adv = model.advance(next, a, ScenarioStream(0).at_depth(depth));
        value += particles[i].first * adv.reward;
        done = adv.terminal;
      }
      auto& g = groups[observation_key(next, cell)];
      g.first.emplace_back(particles[i].first, std::move(next));
      g.second.push_back(done);
    }
    for (auto& [key, g] : groups) value += gamma * exact_tree_value(model, g.first, g.second, depth + 1, horizon, gamma, cell);
    if (value > best) {
      best = value;
      if (best_action) *best_action = a;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("evaluate_policy_value examples") {
  const std::vector<std::pair<double, double>> two{{0.4, -1.0}, {1.6, -2.0}};
  CHECK(evaluate_policy_value(two) == doctest::Approx(-1.8).epsilon(1e-15));
  const std::vector<std::pair<double, double>> one{{2.0, 3.0}};
  CHECK(evaluate_policy_value(one) == 6.0);
  const std::vector<std::pair<double, double>> plain{{1.0, 1.0}, {1.0, 2.0}, {1.0, 6.0}};
  CHECK(evaluate_policy_value(plain) == 3.0);
  CHECK_THROWS_AS(evaluate_policy_value(std::vector<std::pair<double, double>>{}), std::invalid_argument);
}

TEST_CASE("empty road: planner accelerates like the exhaustive optimum") {
  const DrivingModel model(noise_free());
  const WorldState s = empty_road(10.0, 3.0);
  const double gamma = 0.95;

  // Enumerate all 3^4 action sequences.
  double best = -std::numeric_limits<double>::infinity();
  Action best_first = Action::kCur;
  for (int code = 0; code < 81; ++code) {
    WorldState cur = s;
    double ret = 0.0;
    double disc = 1.0;
    int c = code;
    Action first = static_cast<Action>(c % 3);
    for (int t = 0; t < 4; ++t) {
      const auto adv = model.advance(cur, static_cast<Action>(c % 3), ScenarioStream(0).at_depth(t));
      c /= 3;
      ret += disc * adv.reward;
      disc *= gamma;
    }
    if (ret > best) {
      best = ret;
      best_first = first;
    }
  }
  REQUIRE(best_first == Action::kAcc);

  PlannerConfig cfg;
  cfg.scenarios = 5;
  cfg.horizon = 4;
  cfg.max_expansions = 500;
  const IntentionDistribution none;
  const auto result = plan(model, none, observe_state(s), none, s.agents, cfg, 1);
  CHECK(result.action == Action::kAcc);
}

TEST_CASE("crossing agent ahead: planner brakes") {
  const DrivingModel model(noise_free());
  const auto setup = crossing_setup();
  const IntentionDistribution b({{0.5, 0.5}});
  const IntentionDistribution q({{0.1, 0.9}});
  const int horizon = 3;
  const double gamma = 0.95;

  std::vector<std::pair<double, WorldState>> particles;
  for (int m = 0; m < 2; ++m) {
    WorldState s = setup.base;
    s.intentions = {m};
    particles.emplace_back(b.at(0, static_cast<std::size_t>(m)), s);
  }
  Action oracle = Action::kCur;
  exact_tree_value(model, particles, {false, false}, 0, horizon, gamma, 1.0, &oracle);
  REQUIRE(oracle == Action::kDec);

  PlannerConfig cfg;
  cfg.scenarios = 100;
  cfg.horizon = horizon;
  cfg.max_expansions = 1000;
  cfg.gamma = gamma;
  const auto result = plan(model, b, observe_state(setup.base), q, setup.agents, cfg, 3);
  CHECK(result.action == Action::kDec);
}

TEST_CASE("q equal to b reduces to the unweighted planner") {
  const DrivingModel model;
  const auto setup = crossing_setup();
  PlannerConfig weighted;
  weighted.scenarios = 30;
  weighted.horizon = 6;
  weighted.max_expansions = 200;
  PlannerConfig plain = weighted;
  plain.importance_weights = false;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const IntentionDistribution b({{0.3 + 0.1 * static_cast<double>(seed), 0.7 - 0.1 * static_cast<double>(seed)}});
    const auto with_is = plan(model, b, observe_state(setup.base), b, setup.agents, weighted, seed);
    const auto without = plan(model, b, observe_state(setup.base), b, setup.agents, plain, seed);
    for (double w : with_is.scenario_weights) CHECK(w == 1.0);
    CHECK(with_is.action == without.action);
    CHECK(with_is.value_estimate == without.value_estimate);
  }
}

TEST_CASE("planner estimate is unbiased on the enumerable toy") {
  const DrivingModel model(noise_free());
  const auto setup = crossing_setup();
  const IntentionDistribution b({{0.3, 0.7}});
  PlannerConfig cfg;
  cfg.scenarios = 1;
  cfg.horizon = 2;

  for (const std::vector<double> qv : {std::vector<double>{0.5, 0.5}, {0.1, 0.9}, {0.8, 0.2}}) {
    const IntentionDistribution q({qv});
    for (int ai = 0; ai < kActionCount; ++ai) {
      const Action a = static_cast<Action>(ai);
      double exact = 0.0;
      double expectation = 0.0;
      for (int m = 0; m < 2; ++m) {
        // Direct value: first action a, then the reactive policy for one step.
        WorldState s = setup.base;
        s.intentions = {m};
        const auto r0 = model.advance(s, a, ScenarioStream(0).at_depth(0));
        double v = r0.reward;
        if (!r0.terminal) {
          v += cfg.gamma * model.advance(s, reactive_action(s, model.params(), cfg.rollout_ttc), ScenarioStream(0).at_depth(1)).reward;
        }
        exact += b.at(0, static_cast<std::size_t>(m)) * v;

        Scenario sc;
        sc.particle = {observe_state(setup.base), {m}};
        sc.weight = b.at(0, static_cast<std::size_t>(m)) / q.at(0, static_cast<std::size_t>(m));
        BeliefTree tree(model, cfg, {sc}, setup.agents);
        tree.expand(tree.root());
        expectation += q.at(0, static_cast<std::size_t>(m)) * tree.depth_one_value(tree.root(), a);
      }
      CHECK(std::abs(expectation - exact) < 1e-9);
    }
  }
}

TEST_CASE("support violation is raised before search") {
  const DrivingModel model;
  const auto setup = crossing_setup();
  const IntentionDistribution b({{0.5, 0.5}});
  const IntentionDistribution q({{1.0, 0.0}});
  CHECK_THROWS_AS(plan(model, b, observe_state(setup.base), q, setup.agents, PlannerConfig{}, 1), SupportViolation);
  PlannerConfig bad;
  bad.scenarios = 0;
  CHECK_THROWS_AS(plan(model, b, observe_state(setup.base), b, setup.agents, bad, 1), std::invalid_argument);
}

TEST_CASE("plan is deterministic") {
  const DrivingModel model;
  const auto setup = crossing_setup();
  const IntentionDistribution b({{0.6, 0.4}});
  const IntentionDistribution q({{0.3, 0.7}});
  PlannerConfig cfg;
  cfg.scenarios = 40;
  cfg.max_expansions = 150;
  std::ostringstream d1, d2;
  const auto r1 = plan(model, b, observe_state(setup.base), q, setup.agents, cfg, 77, &d1);
  const auto r2 = plan(model, b, observe_state(setup.base), q, setup.agents, cfg, 77, &d2);
  CHECK(r1.action == r2.action);
  CHECK(r1.value_estimate == r2.value_estimate);
  CHECK(r1.root_lower == r2.root_lower);
  CHECK(r1.root_upper == r2.root_upper);
  CHECK(r1.node_count == r2.node_count);
  CHECK(r1.scenario_weights == r2.scenario_weights);
  CHECK(d1.str() == d2.str());
  CHECK_FALSE(d1.str().empty());
}

TEST_CASE("root bounds are monotone over expansions") {
  const DrivingModel model;
  const auto setup = crossing_setup();
  const IntentionDistribution b({{0.5, 0.5}});
  const IntentionDistribution q({{0.2, 0.8}});
  PlannerConfig cfg;
  cfg.scenarios = 50;
  cfg.max_expansions = 300;
  auto scenarios = sample_scenarios(b, observe_state(setup.base), q, cfg, 5);
  BeliefTree tree(model, cfg, std::move(scenarios), setup.agents);
  double lo = tree.lower(tree.root());
  double hi = tree.upper(tree.root());
  CHECK(lo <= hi + 1e-12);
  tree.expand(tree.root());
  for (int i = 0; i < 200; ++i) {
    CHECK(tree.lower(tree.root()) >= lo - 1e-12);
    CHECK(tree.upper(tree.root()) <= hi + 1e-12);
    lo = tree.lower(tree.root());
    hi = tree.upper(tree.root());
    CHECK(lo <= hi + 1e-12);
    if (!tree.trial()) break;
  }
  for (std::size_t v = 0; v < tree.node_count(); ++v) {
    CHECK(tree.lower(static_cast<int>(v)) <= tree.upper(static_cast<int>(v)) + 1e-12);
    CHECK(tree.depth(static_cast<int>(v)) <= cfg.horizon);
  }
}

TEST_CASE("expansion partitions scenarios") {
  const auto setup = crossing_setup();
  const IntentionDistribution b({{0.5, 0.5}});
  PlannerConfig cfg;
  cfg.scenarios = 60;

  SUBCASE("noisy model: counts add up") {
    const DrivingModel model;
    BeliefTree tree(model, cfg, sample_scenarios(b, observe_state(setup.base), b, cfg, 8), setup.agents);
    tree.expand(tree.root());
    for (int ai = 0; ai < kActionCount; ++ai) {
      std::size_t total = 0;
      for (int c : tree.children(tree.root(), static_cast<Action>(ai))) total += tree.scenario_count(c);
      CHECK(total == 60);
    }
  }
  SUBCASE("single scenario gives one child per action") {
    const DrivingModel model;
    PlannerConfig one = cfg;
    one.scenarios = 1;
    BeliefTree tree(model, one, sample_scenarios(b, observe_state(setup.base), b, one, 8), setup.agents);
    tree.expand(tree.root());
    for (int ai = 0; ai < kActionCount; ++ai) CHECK(tree.children(tree.root(), static_cast<Action>(ai)).size() == 1);
  }
  SUBCASE("identical noise-free particles share one child") {
    const DrivingModel model(noise_free());
    std::vector<Scenario> same(10);
    for (std::size_t k = 0; k < same.size(); ++k) {
      same[k].particle = {observe_state(setup.base), {1}};
      same[k].stream = ScenarioStream::for_scenario(4, k);
    }
    BeliefTree tree(model, cfg, std::move(same), setup.agents);
    tree.expand(tree.root());
    for (int ai = 0; ai < kActionCount; ++ai) CHECK(tree.children(tree.root(), static_cast<Action>(ai)).size() == 1);
  }
}

TEST_CASE("default rollout and bounds") {
  const DrivingModel model;
  PlannerConfig cfg;
  cfg.scenarios = 3;
  SUBCASE("empty road at v_max rolls out to zero") {
    const WorldState s = empty_road(0.0, model.params().v_max, 500.0);
    const IntentionDistribution none;
    BeliefTree tree(model, cfg, sample_scenarios(none, observe_state(s), none, cfg, 1), s.agents);
    CHECK(tree.default_value(tree.root()) == 0.0);
    CHECK(tree.upper(tree.root()) == 0.0);
  }
  SUBCASE("leaves at the horizon are worth zero") {
    PlannerConfig short_cfg = cfg;
    short_cfg.horizon = 1;
    const WorldState s = empty_road(0.0, 1.0);
    const IntentionDistribution none;
    BeliefTree tree(model, short_cfg, sample_scenarios(none, observe_state(s), none, short_cfg, 1), s.agents);
    tree.expand(tree.root());
    for (int ai = 0; ai < kActionCount; ++ai) {
      for (int c : tree.children(tree.root(), static_cast<Action>(ai))) {
        CHECK(tree.default_value(c) == 0.0);
        CHECK(tree.upper(c) == 0.0);
      }
    }
  }
  SUBCASE("reactive policy") {
    const auto setup = crossing_setup();
    WorldState s = setup.base;
    s.intentions = {1};
    CHECK(reactive_action(s, model.params(), 2.0) == Action::kDec);
    CHECK(reactive_action(empty_road(0.0, 2.0), model.params(), 2.0) == Action::kAcc);
    CHECK(reactive_action(empty_road(0.0, model.params().v_max), model.params(), 2.0) == Action::kCur);
  }
}

TEST_CASE("uniform attention") {
  CHECK(uniform_attention(IntentionDistribution({{0.9, 0.1}})).agent(0) == std::vector<double>{0.5, 0.5});
  const auto three = uniform_attention(IntentionDistribution({{0.2, 0.2, 0.6}, {1.0}}));
  CHECK(three.agent(0)[1] == doctest::Approx(1.0 / 3));
  CHECK(three.agent(1) == std::vector<double>{1.0});
}

TEST_CASE("ttc attention") {
  const std::vector<double> two{2.0, 4.0};
  const auto a = attention_from_ttc(two);
  CHECK(a[0] == doctest::Approx(2.0 / 3));
  CHECK(a[1] == doctest::Approx(1.0 / 3));
  const std::vector<double> capped{1.0, 20.0};
  const auto c = attention_from_ttc(capped);
  CHECK(c[0] == doctest::Approx(20.0 / 21));
  CHECK(c[1] == doctest::Approx(1.0 / 21));
  const std::vector<double> equal{20.0, 20.0, 20.0};
  CHECK(attention_from_ttc(equal)[2] == doctest::Approx(1.0 / 3));
  const std::vector<double> extreme{0.1, 20.0, 20.0};
  const auto e = attention_from_ttc(extreme);
  CHECK(*std::min_element(e.begin(), e.end()) >= kAttentionFloor);

  const DrivingParams params;
  const auto setup = crossing_setup();
  const Observation z = observe_state(setup.base);
  const auto att = ttc_attention(IntentionDistribution({{0.5, 0.5}}), z, *setup.agents, params);
  CHECK(att.agent(0)[1] > att.agent(0)[0]);
  CHECK(att.is_normalized(1e-12));
  CHECK(path_time_to_collision(z.ego, z.exo[0], (*setup.agents)[0].paths[1], params) < 20.0);
  CHECK(path_time_to_collision(z.ego, z.exo[0], (*setup.agents)[0].paths[0], params) == 20.0);
}
