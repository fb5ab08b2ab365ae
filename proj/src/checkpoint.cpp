#include "leader/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

namespace leader::nn {
namespace {

constexpr const char* kMagic = "LEADER-CHECKPOINT 1";

nlohmann::json layout_to_json(const NetworkLayout& l) {
  return {{"slots", l.slots},
          {"max_intentions", l.max_intentions},
          {"width", l.width},
          {"hidden", l.hidden},
          {"generator_feature_layers", l.generator_feature_layers},
          {"generator_head_layers", l.generator_head_layers},
          {"critic_feature_layers", l.critic_feature_layers},
          {"critic_head_layers", l.critic_head_layers},
          {"noise_sigma", l.noise_sigma},
          {"position_scale", l.position_scale},
          {"v_max", l.v_max}};
}

NetworkLayout layout_from_json(const nlohmann::json& j) {
  NetworkLayout l;
  l.slots = j.at("slots").get<int>();
  l.max_intentions = j.at("max_intentions").get<int>();
  l.width = j.at("width").get<int>();
  l.hidden = j.at("hidden").get<int>();
  l.generator_feature_layers = j.at("generator_feature_layers").get<int>();
  l.generator_head_layers = j.at("generator_head_layers").get<int>();
  l.critic_feature_layers = j.at("critic_feature_layers").get<int>();
  l.critic_head_layers = j.at("critic_head_layers").get<int>();
  l.noise_sigma = j.at("noise_sigma").get<double>();
  l.position_scale = j.at("position_scale").get<double>();
  l.v_max = j.at("v_max").get<double>();
  return l;
}

void write_f32(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

double read_f32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw CheckpointError("checkpoint truncated");
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return static_cast<double>(std::bit_cast<float>(bits));
}

CheckpointHeader read_header(std::istream& in, const std::filesystem::path& file) {
  std::string magic, header;
  if (!std::getline(in, magic) || magic != kMagic) throw CheckpointError("not a checkpoint: " + file.string());
  if (!std::getline(in, header)) throw CheckpointError("checkpoint header missing: " + file.string());
  try {
    const auto j = nlohmann::json::parse(header);
    CheckpointHeader h;
    h.layout = layout_from_json(j.at("layout"));
    h.generator_version = j.at("generator_version").get<std::uint64_t>();
    h.critic_version = j.at("critic_version").get<std::uint64_t>();
    h.seed = j.at("seed").get<std::uint64_t>();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + file.string());
  return in;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Generator& generator, const Critic& critic,
                     std::uint64_t seed) {
  if (!(generator.layout() == critic.layout())) throw CheckpointError("generator and critic layouts differ");
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint: " + file.string());
  nlohmann::json header = {{"layout", layout_to_json(generator.layout())},
                           {"generator_version", generator.params().version()},
                           {"critic_version", critic.params().version()},
                           {"seed", seed}};
  out << kMagic << '\n' << header.dump() << '\n';
  for (const ParamSet* set : {&generator.params(), &critic.params()}) {
    for (const auto& array : set->arrays()) {
      for (double v : array.values) write_f32(out, v);
    }
  }
  if (!out) throw CheckpointError("failed writing checkpoint: " + file.string());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_header(in, file);
}

CheckpointHeader load_checkpoint(const std::filesystem::path& file, Generator& generator, Critic& critic) {
  auto in = open_input(file);
  const CheckpointHeader h = read_header(in, file);
  if (!(h.layout == generator.layout()) || !(h.layout == critic.layout())) {
    throw CheckpointError("checkpoint layout does not match the networks");
  }
  for (ParamSet* set : {&generator.params(), &critic.params()}) {
    for (auto& array : set->arrays()) {
      for (double& v : array.values) v = read_f32(in);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing data in checkpoint");
  generator.params().set_version(h.generator_version);
  critic.params().set_version(h.critic_version);
  return h;
}

}  // namespace leader::nn
