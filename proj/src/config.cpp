#include "leader/config.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace leader {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"map", {"scenarios", "v_max", "path_length", "snap_distance", "repath_distance", "obs_sigma", "perturb"}},
      {"planner",
       {"scenarios", "horizon", "max_expansions", "gamma", "lambda", "xi", "obs_cell", "rollout_ttc",
        "importance_weights"}},
      {"networks",
       {"slots", "max_intentions", "width", "hidden", "generator_feature_layers", "generator_head_layers",
        "critic_feature_layers", "critic_head_layers", "noise_sigma", "position_scale"}},
      {"training",
       {"warmup_steps", "total_steps", "batch_size", "critic_learning_rate", "generator_learning_rate",
        "generator_noise_samples", "actors", "buffer_capacity", "checkpoint_every", "seed", "output_dir"}},
      {"evaluation", {"episodes", "seed", "attention_noise", "checkpoint", "output_dir"}},
  };
  return keys;
}

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& into) {
  if (auto v = tree.get_optional<T>(key)) {
    into = *v;
  } else if (tree.get_child_optional(key)) {
    throw ConfigError("invalid value for " + key + ": " + tree.get<std::string>(key));
  }
}

void read_path(const pt::ptree& tree, const std::string& key, const std::filesystem::path& base,
               std::filesystem::path& into) {
  if (auto v = tree.get_optional<std::string>(key)) into = base / *v;
}

}  // namespace

AppConfig AppConfig::from_string(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (it == allowed_keys().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError("unknown key " + section + "." + key);
    }
  }

  AppConfig c;
  try {
    const pt::ptree empty;
    const auto& map = tree.get_child("map", empty);
    if (auto list = map.get_optional<std::string>("scenarios")) {
      std::vector<std::string> names;
      boost::split(names, *list, boost::is_any_of(","));
      for (auto& n : names) {
        boost::trim(n);
        if (!n.empty()) c.scenarios.push_back(base_dir / n);
      }
    }
    read(map, "v_max", c.driving.v_max);
    read(map, "path_length", c.episode.extraction.max_length);
    read(map, "snap_distance", c.episode.extraction.snap_distance);
    read(map, "repath_distance", c.episode.repath_distance);
    read(map, "obs_sigma", c.episode.belief.obs_sigma);
    read(map, "perturb", c.episode.perturb);

    const auto& planner = tree.get_child("planner", empty);
    read(planner, "scenarios", c.planner.scenarios);
    read(planner, "horizon", c.planner.horizon);
    read(planner, "max_expansions", c.planner.max_expansions);
    read(planner, "gamma", c.planner.gamma);
    read(planner, "lambda", c.planner.lambda);
    read(planner, "xi", c.planner.xi);
    read(planner, "obs_cell", c.planner.obs_cell);
    read(planner, "rollout_ttc", c.planner.rollout_ttc);
    read(planner, "importance_weights", c.planner.importance_weights);

    const auto& net = tree.get_child("networks", empty);
    read(net, "slots", c.layout.slots);
    read(net, "max_intentions", c.layout.max_intentions);
    read(net, "width", c.layout.width);
    read(net, "hidden", c.layout.hidden);
    read(net, "generator_feature_layers", c.layout.generator_feature_layers);
    read(net, "generator_head_layers", c.layout.generator_head_layers);
    read(net, "critic_feature_layers", c.layout.critic_feature_layers);
    read(net, "critic_head_layers", c.layout.critic_head_layers);
    read(net, "noise_sigma", c.layout.noise_sigma);
    read(net, "position_scale", c.layout.position_scale);
    c.layout.v_max = c.driving.v_max;

    const auto& training = tree.get_child("training", empty);
    read(training, "warmup_steps", c.training.warmup_steps);
    read(training, "total_steps", c.training.total_steps);
    read(training, "batch_size", c.training.batch_size);
    read(training, "critic_learning_rate", c.training.critic_learning_rate);
    read(training, "generator_learning_rate", c.training.generator_learning_rate);
    read(training, "generator_noise_samples", c.training.generator_noise_samples);
    read(training, "actors", c.training.actors);
    read(training, "buffer_capacity", c.training.buffer_capacity);
    read(training, "checkpoint_every", c.training.checkpoint_every);
    read(training, "seed", c.training.seed);
    read_path(training, "output_dir", base_dir, c.training.output_dir);

    const auto& eval = tree.get_child("evaluation", empty);
    read(eval, "episodes", c.evaluation.episodes);
    read(eval, "seed", c.evaluation.seed);
    read(eval, "attention_noise", c.evaluation.attention_noise);
    read_path(eval, "checkpoint", base_dir, c.evaluation.checkpoint);
    read_path(eval, "output_dir", base_dir, c.evaluation.output_dir);
  } catch (const pt::ptree_error& e) {
    throw ConfigError(e.what());
  }

  try {
    c.planner.validate();
    c.layout.validate();
    c.training.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config: " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), file.parent_path());
}

std::vector<ScenarioSpec> AppConfig::load_scenarios() const {
  if (scenarios.empty()) throw ConfigError("[map] scenarios is empty");
  std::vector<ScenarioSpec> out;
  for (const auto& s : scenarios) out.push_back(ScenarioSpec::load(s));
  return out;
}

}  // namespace leader
