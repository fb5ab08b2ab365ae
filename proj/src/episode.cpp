#include "leader/episode.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace leader {
namespace {

constexpr std::uint64_t kSpawnKey = 0x5350415755ull;
constexpr std::uint64_t kNoiseKey = 0x4e4f495345ull;
constexpr std::uint64_t kRepathKey = 0x5245504154ull;

std::vector<Polyline> path_lines(const std::vector<CandidatePath>& paths) {
  std::vector<Polyline> out;
  for (const auto& p : paths) out.push_back(p.line);
  return out;
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  const auto doc = nlohmann::json::parse(text);
  ScenarioSpec s;
  s.name = doc.value("name", std::string("scenario"));
  s.map = std::make_shared<const LaneGraph>(LaneGraph::load(base_dir / doc.at("map").get<std::string>()));
  const auto& ego = doc.at("ego");
  s.ego_route = ego.at("route").get<std::string>();
  s.ego_offset = ego.value("offset", 0.0);
  s.ego_speed = ego.value("speed", 0.0);
  s.max_steps = doc.value("max_steps", 60);
  if (doc.contains("perturbation")) {
    s.offset_jitter = doc["perturbation"].value("offset", 0.0);
    s.speed_jitter = doc["perturbation"].value("speed", 0.0);
  }
  for (const auto& a : doc.value("agents", nlohmann::json::array())) {
    AgentSpawn spawn;
    if (a.contains("position")) {
      spawn.position = Vec2{a["position"].at(0).get<double>(), a["position"].at(1).get<double>()};
      spawn.heading = a.value("heading", 0.0);
    } else {
      spawn.route = a.at("route").get<std::string>();
      spawn.offset = a.value("offset", 0.0);
    }
    spawn.speed = a.value("speed", 0.0);
    spawn.preferred_speed = a.value("preferred_speed", 4.0);
    if (a.contains("intention")) spawn.intention = a["intention"].get<int>();
    if (a.contains("prior")) spawn.prior = a["prior"].get<std::vector<double>>();
    s.agents.push_back(std::move(spawn));
  }
  s.map->route(s.ego_route);
  if (s.max_steps < 1) throw std::invalid_argument("scenario max_steps must be positive");
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open scenario file: " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), file.parent_path());
}

Episode::Episode(const ScenarioSpec& spec, const DrivingModel& model, std::uint64_t seed, EpisodeOptions options)
    : spec_(spec), model_(model), options_(options), seed_(seed), stream_(mix64(seed)) {
  ScenarioStream spawn = stream_.split(kSpawnKey);
  auto jitter = [&](double width) {
    const double u = spawn.next_uniform();
    return options_.perturb ? (2.0 * u - 1.0) * width : 0.0;
  };

  const Polyline& route = spec_.map->route(spec_.ego_route);
  state_.ego.path = std::make_shared<const Polyline>(route);
  state_.ego.position = route.point_at(spec_.ego_offset);
  state_.ego.heading = route.heading_at(spec_.ego_offset);
  state_.ego.speed = std::clamp(spec_.ego_speed, 0.0, model_.params().v_max);

  auto contexts = std::make_shared<AgentContexts>();
  std::vector<std::vector<double>> prior_blocks;
  for (const AgentSpawn& a : spec_.agents) {
    ExoState exo;
    const double offset_shift = jitter(spec_.offset_jitter);
    const double speed_shift = jitter(spec_.speed_jitter);
    if (a.position) {
      exo.heading = a.heading;
      exo.position = *a.position + unit_from_angle(a.heading) * offset_shift;
    } else {
      const Polyline& r = spec_.map->route(a.route);
      exo.position = r.point_at(a.offset + offset_shift);
      exo.heading = r.heading_at(a.offset + offset_shift);
    }
    exo.speed = std::max(0.0, a.speed + speed_shift);

    AgentContext ctx;
    ctx.paths = path_lines(spec_.map->candidate_paths(exo.position, options_.extraction));
    ctx.preferred_speed = a.preferred_speed;
    std::vector<double> prior = a.prior;
    if (prior.empty()) prior.assign(ctx.paths.size(), 1.0 / static_cast<double>(ctx.paths.size()));
    if (prior.size() != ctx.paths.size()) {
      throw std::invalid_argument("scenario " + spec_.name + ": prior length " + std::to_string(prior.size()) +
                                  " does not match " + std::to_string(ctx.paths.size()) + " candidate paths");
    }
    const double u = spawn.next_uniform();
    const int intention = a.intention ? *a.intention : sample_categorical(prior, u);
    if (intention < 0 || intention >= static_cast<int>(ctx.paths.size())) {
      throw std::invalid_argument("scenario " + spec_.name + ": intention index out of range");
    }
    state_.exo.push_back(exo);
    state_.intentions.push_back(intention);
    contexts->push_back(std::move(ctx));
    prior_blocks.push_back(std::move(prior));
  }
  state_.agents = std::move(contexts);
  state_.validate();
  belief_ = IntentionDistribution(std::move(prior_blocks));
}

Episode::StepResult Episode::step(Action action) {
  if (done_) throw std::logic_error("episode already finished");
  const Observation before = observation();
  const auto advance = model_.advance(state_, action, stream_.split(kNoiseKey).at_depth(step_));
  travelled_ += (state_.ego.position - before.ego.position).norm();
  ++step_;

  StepResult out;
  out.reward = advance.reward;
  out.collision = is_collision(state_, model_.params());
  collided_ = collided_ || out.collision;
  BeliefUpdateParams bp = options_.belief;
  bp.dt = model_.params().dt;
  belief_ = update_belief(belief_, before, observation(), *state_.agents, bp);
  maintain_agents();
  out.terminal = advance.terminal || step_ >= spec_.max_steps;
  done_ = out.terminal;
  return out;
}

void Episode::maintain_agents() {
  ScenarioStream repath = stream_.split(kRepathKey).at_depth(step_);
  auto contexts = std::make_shared<AgentContexts>();
  std::vector<ExoState> exo;
  std::vector<int> intentions;
  std::vector<std::vector<double>> blocks;
  bool changed = false;
  for (std::size_t i = 0; i < state_.exo.size(); ++i) {
    const double u = repath.next_uniform();
    const AgentContext& ctx = (*state_.agents)[i];
    const Polyline& path = state_.intended_path(i);
    const double remaining = path.length() - path.project(state_.exo[i].position).arc;
    if (remaining >= options_.repath_distance) {
      exo.push_back(state_.exo[i]);
      intentions.push_back(state_.intentions[i]);
      contexts->push_back(ctx);
      blocks.push_back(belief_.agent(i));
      continue;
    }
    changed = true;
    std::vector<CandidatePath> fresh;
    try {
      fresh = spec_.map->candidate_paths(state_.exo[i].position, options_.extraction);
    } catch (const OffMapError&) {
      continue;
    }
    double longest = 0.0;
    for (const auto& p : fresh) longest = std::max(longest, p.line.length());
    if (longest <= remaining + 1.0) {
      // Nothing beyond the current path: keep driving it until the end, then leave.
      if (remaining > model_.params().path_end_tolerance) {
        exo.push_back(state_.exo[i]);
        intentions.push_back(state_.intentions[i]);
        contexts->push_back(ctx);
        blocks.push_back(belief_.agent(i));
      }
      continue;
    }
    AgentContext next{path_lines(fresh), ctx.preferred_speed};
    const std::size_t m = next.paths.size();
    exo.push_back(state_.exo[i]);
    intentions.push_back(std::min(static_cast<int>(u * static_cast<double>(m)), static_cast<int>(m) - 1));
    contexts->push_back(std::move(next));
    blocks.emplace_back(m, 1.0 / static_cast<double>(m));
  }
  if (!changed) return;
  state_.exo = std::move(exo);
  state_.intentions = std::move(intentions);
  state_.agents = std::move(contexts);
  belief_ = IntentionDistribution(std::move(blocks));
}

}  // namespace leader
