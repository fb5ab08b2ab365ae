#include "leader/episode_log.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace leader {
namespace {

using nlohmann::json;

json points_json(const Polyline& line) {
  json pts = json::array();
  for (const Vec2& p : line.points()) pts.push_back({p.x, p.y});
  return pts;
}

Polyline points_from(const json& j) {
  std::vector<Vec2> pts;
  for (const auto& p : j) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return Polyline(std::move(pts));
}

json exo_json(const ExoState& e) {
  return {{"x", e.position.x}, {"y", e.position.y}, {"speed", e.speed}, {"heading", e.heading}};
}

ExoState exo_from(const json& j) {
  ExoState e;
  e.position = {j.at("x").get<double>(), j.at("y").get<double>()};
  e.speed = j.at("speed").get<double>();
  e.heading = j.at("heading").get<double>();
  return e;
}

}  // namespace

void write_episode_log(std::ostream& out, const EpisodeLog& log) {
  json header = {{"type", "episode"}, {"scenario", log.scenario}, {"map", log.map},   {"policy", log.policy},
                 {"seed", log.seed},  {"gamma", log.gamma},       {"steps", log.steps.size()}};
  header["ego_path"] = log.ego_path ? points_json(*log.ego_path) : json::array();
  out << header.dump() << '\n';
  for (const StepLog& s : log.steps) {
    json r = {{"type", "step"}, {"t", s.t}};
    r["ego"] = {{"x", s.observation.ego.position.x},
                {"y", s.observation.ego.position.y},
                {"speed", s.observation.ego.speed},
                {"heading", s.observation.ego.heading}};
    r["exo"] = json::array();
    for (const auto& e : s.observation.exo) r["exo"].push_back(exo_json(e));
    r["belief"] = s.belief.blocks();
    r["attention"] = s.attention.blocks();
    r["paths"] = json::array();
    for (const auto& agent : s.paths) {
      json lines = json::array();
      for (const auto& line : agent) lines.push_back(points_json(line));
      r["paths"].push_back(lines);
    }
    r["action"] = action_name(s.action);
    r["reward"] = s.reward;
    r["value"] = s.value;
    r["collision"] = s.collision;
    r["distance"] = s.distance;
    out << r.dump() << '\n';
  }
}

void write_episode_logs(const std::filesystem::path& file, const std::vector<EpisodeLog>& logs) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write log: " + file.string());
  for (const auto& log : logs) write_episode_log(out, log);
}

std::vector<EpisodeLog> read_episode_logs(std::istream& in) {
  std::vector<EpisodeLog> logs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json r;
    try {
      r = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("log line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = r.value("type", "");
    if (type == "episode") {
      EpisodeLog log;
      log.scenario = r.at("scenario").get<std::string>();
      log.map = r.at("map").get<std::string>();
      log.policy = r.at("policy").get<std::string>();
      log.seed = r.at("seed").get<std::uint64_t>();
      log.gamma = r.at("gamma").get<double>();
      if (!r.at("ego_path").empty()) log.ego_path = std::make_shared<const Polyline>(points_from(r["ego_path"]));
      logs.push_back(std::move(log));
      continue;
    }
    if (type != "step") throw std::runtime_error("log line " + std::to_string(line_no) + ": unknown record type");
    if (logs.empty()) throw std::runtime_error("log line " + std::to_string(line_no) + ": step before episode header");
    EpisodeLog& log = logs.back();
    StepLog s;
    s.t = r.at("t").get<int>();
    if (s.t != static_cast<int>(log.steps.size())) {
      throw std::runtime_error("log line " + std::to_string(line_no) + ": time index not contiguous");
    }
    const auto& ego = r.at("ego");
    s.observation.ego.position = {ego.at("x").get<double>(), ego.at("y").get<double>()};
    s.observation.ego.speed = ego.at("speed").get<double>();
    s.observation.ego.heading = ego.at("heading").get<double>();
    s.observation.ego.path = log.ego_path;
    for (const auto& e : r.at("exo")) s.observation.exo.push_back(exo_from(e));
    s.belief = IntentionDistribution(r.at("belief").get<std::vector<std::vector<double>>>());
    s.attention = IntentionDistribution(r.at("attention").get<std::vector<std::vector<double>>>());
    for (const auto& agent : r.at("paths")) {
      std::vector<Polyline> lines;
      for (const auto& l : agent) lines.push_back(points_from(l));
      s.paths.push_back(std::move(lines));
    }
    const std::string action = r.at("action").get<std::string>();
    bool found = false;
    for (int a = 0; a < kActionCount; ++a) {
      if (action == action_name(static_cast<Action>(a))) {
        s.action = static_cast<Action>(a);
        found = true;
      }
    }
    if (!found) throw std::runtime_error("log line " + std::to_string(line_no) + ": unknown action " + action);
    s.reward = r.at("reward").get<double>();
    s.value = r.at("value").get<double>();
    s.collision = r.at("collision").get<bool>();
    s.distance = r.at("distance").get<double>();
    log.steps.push_back(std::move(s));
  }
  return logs;
}

std::vector<EpisodeLog> read_episode_logs(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open log: " + file.string());
  return read_episode_logs(in);
}

void export_attention_snapshot(const EpisodeLog& log, int step, std::ostream& out) {
  if (step < 0 || step >= static_cast<int>(log.steps.size())) {
    throw std::out_of_range("step " + std::to_string(step) + " outside log of " + std::to_string(log.steps.size()) +
                            " steps");
  }
  const StepLog& s = log.steps[static_cast<std::size_t>(step)];
  json ego = {{"type", "ego"},
              {"t", s.t},
              {"x", s.observation.ego.position.x},
              {"y", s.observation.ego.position.y},
              {"speed", s.observation.ego.speed},
              {"heading", s.observation.ego.heading}};
  ego["path"] = log.ego_path ? points_json(*log.ego_path) : json::array();
  out << ego.dump() << '\n';
  for (std::size_t i = 0; i < s.observation.exo.size(); ++i) {
    json agent = exo_json(s.observation.exo[i]);
    agent["type"] = "agent";
    agent["agent"] = i;
    out << agent.dump() << '\n';
    for (std::size_t m = 0; m < s.paths[i].size(); ++m) {
      json path = {{"type", "path"},
                   {"agent", i},
                   {"intention", m},
                   {"belief", s.belief.at(i, m)},
                   {"attention", s.attention.at(i, m)}};
      path["points"] = points_json(s.paths[i][m]);
      out << path.dump() << '\n';
    }
  }
}

}  // namespace leader
