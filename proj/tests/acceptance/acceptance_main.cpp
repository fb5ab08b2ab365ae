// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../fixtures.h"
#include "../oracles.h"
#include "leader/checkpoint.h"
#include "leader/config.h"
#include "leader/evaluation.h"
#include "leader/is_math.h"
#include "leader/planner.h"
#include "leader/trainer.h"

namespace {

using namespace leader;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

struct Paths {
  fs::path repo;
  fs::path work;
  fs::path cli;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Importance-sampling identities

struct Fixture {
  ismath::DiscreteProblem problem;
  std::vector<std::vector<double>> proposals;
};

std::vector<Fixture> discrete_fixtures() {
  std::vector<Fixture> out;
  out.push_back({{{0.5, 0.5}, {0.0, 10.0}}, {{0.5, 0.5}, {0.2, 0.8}, {0.9, 0.1}, {0.0, 1.0}}});
  out.push_back({{{1.0}, {3.0}}, {{1.0}}});
  out.push_back({{{0.2, 0.3, 0.5}, {1.0, -2.0, 4.0}}, {{0.2, 0.3, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.6, 0.3, 0.1}}});
  out.push_back({{{0.1, 0.2, 0.3, 0.4}, {5.0, 5.0, 0.0, -1.0}}, {{0.25, 0.25, 0.25, 0.25}, {0.7, 0.1, 0.1, 0.1}}});
  out.push_back({{{0.05, 0.15, 0.2, 0.25, 0.35}, {-3.0, 1.0, 2.0, 8.0, -0.5}},
                 {{0.2, 0.2, 0.2, 0.2, 0.2}, {0.05, 0.15, 0.2, 0.25, 0.35}, {0.4, 0.05, 0.05, 0.1, 0.4}}});
  for (auto& f : out) {
    bool any_nonzero = false;
    for (std::size_t x = 0; x < f.problem.size(); ++x) any_nonzero |= f.problem.f[x] * f.problem.p[x] != 0.0;
    if (any_nonzero) f.proposals.push_back(ismath::optimal_q(f.problem));
  }
  return out;
}

Outcome is_unbiasedness() {
  int checked = 0;
  double worst = 0.0;
  for (const auto& fx : discrete_fixtures()) {
    const auto& pr = fx.problem;
    double mu = 0.0;
    for (std::size_t x = 0; x < pr.size(); ++x) mu += pr.p[x] * pr.f[x];
    for (const auto& q : fx.proposals) {
      // Single-sample and two-sample estimators, enumerated exhaustively.
      auto term = [&](std::size_t x) { return pr.f[x] * pr.p[x] / q[x]; };
      double one = 0.0, two = 0.0;
      for (std::size_t x = 0; x < pr.size(); ++x) {
        if (q[x] == 0.0) continue;
        one += q[x] * term(x);
        for (std::size_t y = 0; y < pr.size(); ++y) {
          if (q[y] == 0.0) continue;
          two += q[x] * q[y] * 0.5 * (term(x) + term(y));
        }
      }
      const double lib = ismath::exact_estimator_mean(pr, q);
      worst = std::max({worst, std::abs(one - mu), std::abs(two - mu), std::abs(lib - mu)});
      ++checked;
    }
  }
  return {worst <= 1e-12, std::to_string(checked) + " (problem, q) pairs, max |E - mu| = " + fmt(worst)};
}

Outcome variance_formula() {
  const ismath::DiscreteProblem pr{{0.5, 0.5}, {0.0, 10.0}};
  std::ostringstream detail;
  bool pass = true;
  std::uint64_t seed = 100;
  for (const std::vector<double> q : {std::vector<double>{0.2, 0.8}, {0.5, 0.5}, {0.7, 0.3}}) {
    ScenarioStream s(seed++);
    const int n = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double est = ismath::is_estimate(pr, q, 1, s);
      sum += est;
      sum2 += est * est;
    }
    const double mean = sum / n;
    const double empirical = (sum2 - n * mean * mean) / (n - 1);
    const double exact = ismath::estimator_variance(pr, q, 1);
    double oracle = -25.0;
    for (std::size_t x = 0; x < 2; ++x) oracle += q[x] * std::pow(pr.f[x] * pr.p[x] / q[x], 2);
    const double rel = std::abs(empirical - exact) / exact;
    pass &= rel <= 0.05 && std::abs(exact - oracle) <= 1e-12 * std::max(1.0, oracle);
    detail << "q1=" << q[1] << " var " << fmt(empirical) << " vs " << fmt(exact) << " (" << fmt(100 * rel, 3) << "%); ";
  }
  // Optimal proposals for single-signed f.
  const std::vector<ismath::DiscreteProblem> single{
      pr, {{0.2, 0.3, 0.5}, {1.0, 2.0, 4.0}}, {{0.25, 0.25, 0.5}, {-1.0, -3.0, -0.5}}, {{0.1, 0.9}, {7.0, 7.0}}};
  double worst = 0.0;
  for (const auto& p : single) worst = std::max(worst, ismath::estimator_variance(p, ismath::optimal_q(p), 1));
  pass &= worst == 0.0;
  detail << "optimal-q variance max " << fmt(worst);
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// Planner

Observation observe_state(const WorldState& s) { return Observation{s.ego, s.exo}; }

struct ToyInstance {
  WorldState state;
  std::shared_ptr<const AgentContexts> agents;
  IntentionDistribution belief;
};

ToyInstance toy_instance(std::uint64_t seed) {
  ScenarioStream rng(seed);
  ToyInstance t;
  t.state = testing::empty_road(0.0, 1.0 + 4.0 * rng.next_uniform());
  auto ctx = std::make_shared<AgentContexts>();
  const int agents = 1 + static_cast<int>(rng.next_uniform() * 2.0);
  std::vector<std::vector<double>> probs;
  for (int i = 0; i < agents; ++i) {
    const Vec2 start{4.0 + 12.0 * rng.next_uniform(), -4.0 - 8.0 * rng.next_uniform()};
    ctx->push_back(testing::crossing_agent_context(start, 0.5 + rng.next_uniform(), 3.0 + 2.0 * rng.next_uniform()));
    t.state.exo.push_back(testing::exo_at(start, 2.0 + 3.0 * rng.next_uniform(), M_PI / 2));
    const double pc = 0.05 + 0.9 * rng.next_uniform();
    probs.push_back({1.0 - pc, pc});
  }
  t.agents = ctx;
  t.state.agents = ctx;
  t.belief = IntentionDistribution(std::move(probs));
  return t;
}

Outcome estimator_reduction() {
  const DrivingModel model;
  PlannerConfig weighted;  // K = 100, H = 10, 3000 expansions
  PlannerConfig plain = weighted;
  plain.importance_weights = false;
  int agree = 0;
  int unit_weights = 0;
  const int instances = 50;
  for (int i = 0; i < instances; ++i) {
    const auto t = toy_instance(1000 + static_cast<std::uint64_t>(i));
    const auto z = observe_state(t.state);
    const auto a = plan(model, t.belief, z, t.belief, t.agents, weighted, 77 + static_cast<std::uint64_t>(i));
    const auto b = plan(model, t.belief, z, t.belief, t.agents, plain, 77 + static_cast<std::uint64_t>(i));
    if (std::all_of(a.scenario_weights.begin(), a.scenario_weights.end(), [](double w) { return w == 1.0; })) ++unit_weights;
    if (a.action == b.action) ++agree;
  }
  return {agree == instances && unit_weights == instances,
          "unit weights " + std::to_string(unit_weights) + "/50, equal actions " + std::to_string(agree) + "/50"};
}

Outcome planner_estimator() {
  DrivingParams params;
  params.exo_noise_sigma = 0.0;
  const DrivingModel model(params);
  WorldState base = testing::empty_road(0.0, 4.0);
  auto ctx = std::make_shared<AgentContexts>();
  ctx->push_back(testing::crossing_agent_context({5.0, -5.0}, 1.0, 4.0));
  base.agents = ctx;
  base.exo.push_back(testing::exo_at({5.0, -5.0}, 4.0, M_PI / 2));
  const Observation z = observe_state(base);
  const IntentionDistribution b({{0.9, 0.1}});

  PlannerConfig cfg;
  cfg.horizon = 2;
  cfg.scenarios = 2;

  double worst = 0.0;
  int cases = 0;
  for (const std::vector<double> qv : {std::vector<double>{0.5, 0.5}, {0.2, 0.8}, {0.95, 0.05}}) {
    for (int ai = 0; ai < kActionCount; ++ai) {
      const Action first = static_cast<Action>(ai);
      // Exact value under b: take `first`, then the reactive default policy.
      double exact = 0.0;
      for (int m = 0; m < 2; ++m) {
        WorldState s = base;
        s.intentions = {m};
        const auto r0 = model.advance(s, first, ScenarioStream(0).at_depth(0));
        double v = r0.reward;
        if (!r0.terminal) {
          const Action next = reactive_action(s, params, cfg.rollout_ttc);
          v += cfg.gamma * model.advance(s, next, ScenarioStream(0).at_depth(1)).reward;
        }
        exact += b.at(0, static_cast<std::size_t>(m)) * v;
      }
      // Expectation of the tree estimate over every draw of K = 2 intentions from q.
      double expectation = 0.0;
      for (int m0 = 0; m0 < 2; ++m0) {
        for (int m1 = 0; m1 < 2; ++m1) {
          std::vector<Scenario> scenarios(2);
          const int draws[2] = {m0, m1};
          double prob = 1.0;
          for (int k = 0; k < 2; ++k) {
            scenarios[static_cast<std::size_t>(k)].particle = {z, {draws[k]}};
            scenarios[static_cast<std::size_t>(k)].weight = b.at(0, static_cast<std::size_t>(draws[k])) / qv[static_cast<std::size_t>(draws[k])];
            scenarios[static_cast<std::size_t>(k)].stream = ScenarioStream::for_scenario(5, static_cast<std::uint64_t>(k));
            prob *= qv[static_cast<std::size_t>(draws[k])];
          }
          BeliefTree tree(model, cfg, std::move(scenarios), ctx);
          tree.expand(tree.root());
          expectation += prob * tree.depth_one_value(tree.root(), first);
        }
      }
      worst = std::max(worst, std::abs(expectation - exact));
      ++cases;
    }
  }
  return {worst <= 1e-9, std::to_string(cases) + " (policy, q) cases, max |E[V_hat] - V| = " + fmt(worst)};
}

Outcome reward_exactness() {
  const DrivingParams p;
  WorldState crash = testing::empty_road(0.0, 2.0);
  auto ctx = std::make_shared<AgentContexts>();
  ctx->push_back({{Polyline({{0.0, 0.0}, {0.0, 50.0}})}, 3.0});
  crash.agents = ctx;
  crash.exo.push_back(testing::exo_at({0.0, 0.0}, 0.0, M_PI / 2));
  crash.intentions = {0};
  const double r1 = reward(crash, Action::kCur, p);
  const double r2 = reward(testing::empty_road(0.0, p.v_max), Action::kCur, p);
  const double r3 = reward(testing::empty_road(0.0, 3.0), Action::kAcc, p);
  const bool pass = std::abs(r1 - (-90.66667)) <= 1e-5 && std::abs(r1 - (-272.0 / 3.0)) <= 1e-9 && r2 == 0.0 &&
                    std::abs(r3 - (-0.6)) <= 1e-9;
  return {pass, "collision " + fmt(r1, 12) + ", cruise " + fmt(r2) + ", accelerate " + fmt(r3, 12)};
}

// ---------------------------------------------------------------------------
// Networks and training

Outcome gradient_correctness() {
  nn::NetworkLayout layout = testing::small_layout(2, 3);
  layout.width = 12;
  layout.hidden = 10;
  layout.generator_feature_layers = 4;
  layout.critic_feature_layers = 3;
  ScenarioStream rng(2024);
  const std::vector<int> counts{3, 2};
  double critic_err = 0.0, generator_err = 0.0, chain_err = 0.0;
  nn::Generator gen(layout);
  nn::Critic critic(layout);
  for (int trial = 0; trial < 20; ++trial) {
    testing::randomize(critic.params(), rng, 0.4);
    const auto cin = testing::random_critic_input(layout, counts, rng);
    const double target = rng.next_gaussian();
    nn::Critic::Trace ct;
    const double v = critic.forward(cin, &ct).value;
    auto cg = nn::zeros_like(critic.params());
    critic.backward(ct, 2.0 * (v - target), cg);
    critic_err = std::max(critic_err, testing::max_relative_gradient_error(critic.params(), cg, [&] {
      const double d = critic.forward(cin).value - target;
      return d * d;
    }));

    testing::randomize(gen.params(), rng, 0.4);
    const auto gin = testing::random_generator_input(layout, counts, rng);
    const auto weights = testing::gaussian_vector(layout.belief_size(), rng);
    nn::Generator::Trace gt;
    gen.forward(gin, &gt);
    auto gg = nn::zeros_like(gen.params());
    gen.backward(gin, gt, weights, gg);
    generator_err = std::max(generator_err, testing::max_relative_gradient_error(gen.params(), gg, [&] {
      const auto q = gen.forward(gin).attention;
      double s = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k) s += q[k] * weights[k];
      return s;
    }));

    const std::vector<ReplayEntry> batch{testing::random_entry(layout, counts, rng), testing::random_entry(layout, counts, rng)};
    const std::vector<std::vector<double>> noise{testing::gaussian_vector(layout.belief_size(), rng),
                                                 testing::gaussian_vector(layout.belief_size(), rng)};
    auto chain = nn::zeros_like(gen.params());
    generator_objective(gen, critic, batch, noise, &chain);
    chain_err = std::max(chain_err, testing::max_relative_gradient_error(gen.params(), chain, [&] {
      return generator_objective(gen, critic, batch, noise, nullptr);
    }));
  }
  const double worst = std::max({critic_err, generator_err, chain_err});
  return {worst <= 1e-4, "max relative error: critic " + fmt(critic_err, 3) + ", generator " + fmt(generator_err, 3) +
                             ", generator through critic " + fmt(chain_err, 3)};
}

PlannerConfig small_planner() {
  PlannerConfig p;
  p.scenarios = 10;
  p.horizon = 5;
  p.max_expansions = 30;
  return p;
}

Outcome minimax_mechanics(const Paths& paths) {
  const nn::NetworkLayout layout = testing::small_layout(1, 2);
  ScenarioStream rng(31);
  std::ostringstream detail;

  nn::Critic constant(layout);
  constant.params().arrays().back().values[0] = -2.0;
  ReplayEntry entry = testing::random_entry(layout, {2}, rng);
  entry.value = -1.0;
  const double loss = critic_loss(constant, std::vector<ReplayEntry>{entry}, nullptr);
  detail << "single-entry loss " << fmt(loss, 17);
  bool pass = loss == 1.0;

  nn::Generator gen(layout);
  nn::Critic critic(layout);
  initialize_networks(gen, critic, 8);
  const auto phi_before = critic.params().flatten();
  std::vector<ReplayEntry> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(testing::random_entry(layout, {2}, rng));
  nn::AdamState gs;
  ScenarioStream noise(9);
  for (int i = 0; i < 5; ++i) generator_update(gen, gs, critic, batch, noise, 1, {});
  const bool frozen = critic.params().flatten() == phi_before && critic.params() == critic.params();
  detail << "; critic bit-identical after generator updates: " << (frozen ? "yes" : "no");
  pass &= frozen;

  const DrivingModel model;
  const std::vector<ScenarioSpec> scenarios{ScenarioSpec::load(paths.repo / "data/scenarios/crossing_toy.json")};
  TrainConfig cfg;
  cfg.warmup_steps = 60;
  cfg.total_steps = 60;
  cfg.batch_size = 8;
  cfg.checkpoint_every = 0;
  cfg.seed = 4;
  cfg.output_dir = paths.work / "warmup_only";
  nn::Generator g1(layout);
  nn::Critic c1(layout);
  initialize_networks(g1, c1, cfg.seed);
  const nn::Generator g1_init = g1;
  const auto warm = train(cfg, small_planner(), model, scenarios, g1, c1);
  const bool untouched = warm.generator_steps == 0 && g1.params() == g1_init.params() && warm.critic_steps > 0;
  detail << "; warm-up-only run: " << warm.generator_steps << " generator steps, " << warm.critic_steps
         << " critic steps";
  pass &= untouched;

  cfg.total_steps = 120;
  cfg.output_dir = paths.work / "warmup_then_adversarial";
  nn::Generator g2(layout);
  nn::Critic c2(layout);
  initialize_networks(g2, c2, cfg.seed);
  const auto mixed = train(cfg, small_planner(), model, scenarios, g2, c2);
  bool no_early_steps = mixed.generator_steps == cfg.total_steps - cfg.warmup_steps;
  for (const auto& r : mixed.curve) {
    if (r.iteration <= static_cast<std::uint64_t>(cfg.warmup_steps) && !std::isnan(r.generator_objective)) no_early_steps = false;
  }
  detail << "; warm-up " << cfg.warmup_steps << " of " << cfg.total_steps << ": " << mixed.generator_steps
         << " generator steps, none before warm-up: " << (no_early_steps ? "yes" : "no");
  pass &= no_early_steps;
  return {pass, detail.str()};
}

// Index of the candidate path that reaches past the ego lane (y > 0).
int crossing_intention(const std::vector<Polyline>& paths) {
  for (std::size_t m = 0; m < paths.size(); ++m) {
    const auto& pts = paths[m].points();
    if (std::any_of(pts.begin(), pts.end(), [](const Vec2& p) { return p.y > 1.0; })) return static_cast<int>(m);
  }
  return -1;
}

Outcome adversarial_attention(const Paths& paths) {
  AppConfig config = AppConfig::load(paths.repo / "configs/crossing_toy.ini");
  config.training.output_dir = paths.work / "crossing_toy";
  config.training.actors = 1;
  const auto scenarios = config.load_scenarios();
  const DrivingModel model(config.driving);
  nn::Generator gen(config.layout);
  nn::Critic critic(config.layout);
  initialize_networks(gen, critic, config.training.seed);

  const auto start = std::chrono::steady_clock::now();
  train(config.training, config.planner, model, scenarios, gen, critic, config.episode);
  const double train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // Held-out states: the first five steps of evaluation episodes under a seed
  // disjoint from training, with the generator fed zero logit noise.
  EvaluationConfig eval = config.evaluation;
  eval.episodes = 30;
  eval.output_dir.clear();
  const auto result = run_evaluation(eval, PolicyKind::kLeader, config.planner, model, scenarios, &gen, config.episode);
  int states = 0, above = 0;
  double mean_q = 0.0, mean_b = 0.0;
  for (const auto& log : result.logs) {
    for (const auto& step : log.steps) {
      if (step.t >= 5 || states == 100) break;
      const int cross = crossing_intention(step.paths.at(0));
      if (cross < 0) throw std::logic_error("no crossing intention in the toy scenario");
      const double q = step.attention.at(0, static_cast<std::size_t>(cross));
      const double b = step.belief.at(0, static_cast<std::size_t>(cross));
      mean_q += q;
      mean_b += b;
      if (q > b) ++above;
      ++states;
    }
  }
  const bool pass = states == 100 && above >= 90 && train_seconds <= 1800.0;
  return {pass, "q(cross) > b(cross) on " + std::to_string(above) + "/" + std::to_string(states) +
                    " held-out states (mean q " + fmt(mean_q / std::max(states, 1), 3) + ", mean b " +
                    fmt(mean_b / std::max(states, 1), 3) + "); training " + fmt(train_seconds, 4) + " s"};
}

Outcome table_one(const Paths& paths) {
  AppConfig config = AppConfig::load(paths.repo / "configs/fixtures.ini");
  config.training.output_dir = paths.work / "fixtures";
  const auto scenarios = config.load_scenarios();
  const DrivingModel model(config.driving);
  nn::Generator gen(config.layout);
  nn::Critic critic(config.layout);
  initialize_networks(gen, critic, config.training.seed);
  train(config.training, config.planner, model, scenarios, gen, critic, config.episode);

  std::ostringstream detail;
  std::vector<MetricsReport> pooled;
  for (const PolicyKind kind : {PolicyKind::kLeader, PolicyKind::kUniform, PolicyKind::kTtc}) {
    EvaluationConfig eval = config.evaluation;
    eval.output_dir = paths.work / "fixtures" / (std::string("eval_") + policy_name(kind));
    const auto result = run_evaluation(eval, kind, config.planner, model, scenarios,
                                       kind == PolicyKind::kLeader ? &gen : nullptr, config.episode);
    pooled.push_back(result.pooled);
    detail << policy_name(kind) << ": collision rate " << fmt(result.pooled.collision_rate, 4) << " ("
           << result.pooled.collisions << "/" << result.pooled.steps << " steps), reward "
           << fmt(result.pooled.cumulative_reward, 5) << "; ";
  }
  const auto& leader = pooled[0];
  const bool safer = leader.collision_rate < pooled[1].collision_rate && leader.collision_rate < pooled[2].collision_rate;
  const bool rewarding = leader.cumulative_reward >= std::max(pooled[1].cumulative_reward, pooled[2].cumulative_reward);
  detail << "episodes per policy " << config.evaluation.episodes << ", K=" << config.planner.scenarios;
  return {safer && rewarding, detail.str()};
}

int run_cli(const Paths& paths, const std::string& args) {
  const std::string cmd = "\"" + paths.cli.string() + "\" " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

Outcome determinism(const Paths& paths) {
  const fs::path dir = paths.work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string scenario = (paths.repo / "data/scenarios/crossing_toy.json").string();
  for (const std::string run : {"a", "b"}) {
    std::ofstream ini(dir / (run + ".ini"));
    ini << "[map]\nscenarios = " << scenario << "\n\n[planner]\nscenarios = 16\nhorizon = 6\nmax_expansions = 60\n\n"
        << "[networks]\nslots = 1\nmax_intentions = 2\nwidth = 16\nhidden = 16\n\n"
        << "[training]\nwarmup_steps = 100\ntotal_steps = 300\nbatch_size = 16\ncheckpoint_every = 0\nseed = 21\n"
        << "output_dir = train_" << run << "\n\n[evaluation]\nepisodes = 8\nseed = 5\ncheckpoint = train_" << run
        << "/final.bin\n";
  }
  bool ok = true;
  for (const std::string run : {"a", "b"}) {
    const std::string ini = (dir / (run + ".ini")).string();
    ok &= run_cli(paths, "train \"" + ini + "\"") == 0;
    ok &= run_cli(paths, "eval \"" + ini + "\" --policy leader --output \"" + (dir / ("eval_leader_" + run)).string() + "\"") == 0;
    ok &= run_cli(paths, "eval \"" + ini + "\" --policy ttc --output \"" + (dir / ("eval_ttc_" + run)).string() + "\"") == 0;
  }
  if (!ok) return {false, "command-line run failed"};
  int identical = 0;
  const std::vector<std::pair<std::string, std::string>> files{{"train_", "/learning_curve.csv"},
                                                               {"train_", "/final.bin"},
                                                               {"eval_leader_", "/metrics.csv"},
                                                               {"eval_leader_", "/episodes.jsonl"},
                                                               {"eval_ttc_", "/metrics.csv"},
                                                               {"eval_ttc_", "/episodes.jsonl"}};
  for (const auto& [prefix, name] : files) {
    if (slurp(dir / (prefix + "a" + name)) == slurp(dir / (prefix + "b" + name))) ++identical;
  }
  return {identical == static_cast<int>(files.size()),
          std::to_string(identical) + "/" + std::to_string(files.size()) + " output files bit-identical across runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Paths paths;
  std::string repo, work, cli;
  std::vector<std::string> only;
  app.add_option("--repo", repo, "Repository root")->required();
  app.add_option("--work", work, "Scratch directory")->required();
  app.add_option("--cli", cli, "Path to the command-line tool")->required();
  app.add_option("--only", only, "Run only the named criteria");
  CLI11_PARSE(app, argc, argv);
  paths.repo = fs::absolute(repo);
  paths.work = fs::absolute(work);
  paths.cli = fs::absolute(cli);
  fs::create_directories(paths.work);

  const std::vector<Criterion> criteria{
      {"is_unbiasedness", 1.0, is_unbiasedness},
      {"variance_formula", 10.0, variance_formula},
      {"estimator_reduction", 120.0, estimator_reduction},
      {"planner_estimator", 60.0, planner_estimator},
      {"reward_exactness", 1.0, reward_exactness},
      {"gradient_correctness", 60.0, gradient_correctness},
      {"minimax_mechanics", 120.0, [&] { return minimax_mechanics(paths); }},
      {"adversarial_attention", 1800.0, [&] { return adversarial_attention(paths); }},
      {"directional_table1", 7200.0, [&] { return table_one(paths); }},
      {"determinism", 300.0, [&] { return determinism(paths); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      out.pass = false;
      out.detail += "; over time budget of " + fmt(c.budget_seconds) + " s";
    }
    if (!out.pass) ++failures;
    std::cout << (out.pass ? "PASS " : "FAIL ") << c.name << " [" << std::fixed << std::setprecision(2) << seconds
              << " s] " << std::defaultfloat << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
