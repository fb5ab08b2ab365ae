#include "leader/networks.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leader::nn {

void NetworkLayout::validate() const {
  if (slots < 1 || max_intentions < 1 || width < 1 || hidden < 1) throw std::invalid_argument("network sizes must be positive");
  if (generator_feature_layers < 1 || generator_head_layers < 1 || critic_feature_layers < 1 || critic_head_layers < 1) {
    throw std::invalid_argument("every network stack needs at least one layer");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
}

std::vector<double> encode_distribution(const IntentionDistribution& d, const NetworkLayout& layout) {
  if (d.agent_count() > static_cast<std::size_t>(layout.slots)) throw std::invalid_argument("more agents than network slots");
  const auto m_max = static_cast<std::size_t>(layout.max_intentions);
  std::vector<double> flat(layout.belief_size(), 0.0);
  for (std::size_t i = 0; i < d.agent_count(); ++i) {
    if (d.intention_count(i) > m_max) throw std::invalid_argument("more intentions than network supports");
    for (std::size_t m = 0; m < d.intention_count(i); ++m) flat[i * m_max + m] = d.at(i, m);
  }
  return flat;
}

IntentionDistribution decode_distribution(std::span<const double> flat, std::span<const int> counts,
                                          const NetworkLayout& layout) {
  const auto m_max = static_cast<std::size_t>(layout.max_intentions);
  std::vector<std::vector<double>> probs;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto m = static_cast<std::size_t>(counts[i]);
    probs.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i * m_max),
                       flat.begin() + static_cast<std::ptrdiff_t>(i * m_max + m));
  }
  return IntentionDistribution(std::move(probs));
}

std::vector<int> intention_counts(const IntentionDistribution& d) {
  std::vector<int> counts;
  for (std::size_t i = 0; i < d.agent_count(); ++i) counts.push_back(static_cast<int>(d.intention_count(i)));
  return counts;
}

std::vector<double> encode_observation(const Observation& z, const NetworkLayout& layout) {
  if (z.exo.size() > static_cast<std::size_t>(layout.slots)) throw std::invalid_argument("more agents than network slots");
  std::vector<double> out(layout.observation_size(), 0.0);
  const double c = std::cos(z.ego.heading);
  const double s = std::sin(z.ego.heading);
  out[0] = z.ego.position.x / (5.0 * layout.position_scale);
  out[1] = z.ego.position.y / (5.0 * layout.position_scale);
  out[2] = z.ego.speed / layout.v_max;
  out[3] = c;
  out[4] = s;
  for (std::size_t i = 0; i < z.exo.size(); ++i) {
    const ExoState& e = z.exo[i];
    const Vec2 d = e.position - z.ego.position;
    const std::size_t o = NetworkLayout::kEgoFeatures + i * NetworkLayout::kAgentFeatures;
    out[o] = 1.0;
    out[o + 1] = (c * d.x + s * d.y) / layout.position_scale;
    out[o + 2] = (-s * d.x + c * d.y) / layout.position_scale;
    out[o + 3] = e.speed / layout.v_max;
    out[o + 4] = std::cos(e.heading - z.ego.heading);
    out[o + 5] = std::sin(e.heading - z.ego.heading);
  }
  return out;
}

FlooredSoftmax floored_softmax(std::span<const double> logits, double floor) {
  const std::size_t n = logits.size();
  FlooredSoftmax fs;
  fs.softmax.resize(n);
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    fs.softmax[j] = std::exp(logits[j] - top);
    total += fs.softmax[j];
  }
  for (double& p : fs.softmax) p /= total;

  fs.pinned.assign(n, false);
  fs.output.resize(n);
  while (true) {
    std::size_t pinned = 0;
    double free_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (fs.pinned[j]) {
        ++pinned;
      } else {
        free_mass += fs.softmax[j];
      }
    }
    const double budget = 1.0 - floor * static_cast<double>(pinned);
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (fs.pinned[j]) {
        fs.output[j] = floor;
        continue;
      }
      fs.output[j] = fs.softmax[j] * budget / free_mass;
      if (fs.output[j] < floor) {
        fs.pinned[j] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return fs;
}

std::vector<double> floored_softmax_backward(const FlooredSoftmax& fs, std::span<const double> d_output, double floor) {
  const std::size_t n = fs.softmax.size();
  std::size_t pinned = 0;
  double free_mass = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (fs.pinned[j]) {
      ++pinned;
    } else {
      free_mass += fs.softmax[j];
    }
  }
  const double budget = 1.0 - floor * static_cast<double>(pinned);
  double weighted = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!fs.pinned[j]) weighted += d_output[j] * fs.softmax[j];
  }
  weighted /= free_mass;
  std::vector<double> d_soft(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!fs.pinned[j]) d_soft[j] = budget / free_mass * (d_output[j] - weighted);
  }
  double dot = 0.0;
  for (std::size_t j = 0; j < n; ++j) dot += fs.softmax[j] * d_soft[j];
  std::vector<double> d_logits(n);
  for (std::size_t j = 0; j < n; ++j) d_logits[j] = fs.softmax[j] * (d_soft[j] - dot);
  return d_logits;
}

Generator::Generator(const NetworkLayout& layout) : layout_(layout) {
  layout_.validate();
  const auto w = static_cast<std::size_t>(layout_.width);
  const auto h = static_cast<std::size_t>(layout_.hidden);
  features_ = Mlp::create(params_, "generator.features", input_size(), w,
                          static_cast<std::size_t>(layout_.generator_feature_layers), w, true);
  gru_ = GruCell::create(params_, "generator.gru", w, h);
  head_ = Mlp::create(params_, "generator.head", h, w, static_cast<std::size_t>(layout_.generator_head_layers),
                      layout_.belief_size(), false);
}

Generator::Output Generator::forward(const GeneratorInput& in, Trace* trace) const {
  const auto m_max = static_cast<std::size_t>(layout_.max_intentions);
  if (in.belief.size() != layout_.belief_size() || in.observation.size() != layout_.observation_size()) {
    throw std::invalid_argument("generator input layout mismatch");
  }
  if (in.noise.size() != layout_.belief_size() || in.memory.size() != static_cast<std::size_t>(layout_.hidden)) {
    throw std::invalid_argument("generator noise or memory size mismatch");
  }
  std::vector<double> x(in.belief);
  x.insert(x.end(), in.observation.begin(), in.observation.end());

  const auto f = features_.forward(params_, x, trace ? &trace->features : nullptr);
  Output out;
  out.memory = gru_.forward(params_, f, in.memory, trace ? &trace->gru : nullptr);
  const auto logits = head_.forward(params_, out.memory, trace ? &trace->head : nullptr);

  out.attention.assign(layout_.belief_size(), 0.0);
  if (trace) {
    trace->blocks.clear();
    trace->counts = in.counts;
  }
  for (std::size_t i = 0; i < in.counts.size(); ++i) {
    const auto m = static_cast<std::size_t>(in.counts[i]);
    std::vector<double> block(m);
    for (std::size_t j = 0; j < m; ++j) block[j] = logits[i * m_max + j] + layout_.noise_sigma * in.noise[i * m_max + j];
    auto fs = floored_softmax(block, kAttentionFloor);
    for (std::size_t j = 0; j < m; ++j) out.attention[i * m_max + j] = fs.output[j];
    if (trace) trace->blocks.push_back(std::move(fs));
  }
  return out;
}

void Generator::backward(const GeneratorInput& in, const Trace& trace, std::span<const double> d_attention,
                         Gradients& g) const {
  (void)in;
  const auto m_max = static_cast<std::size_t>(layout_.max_intentions);
  std::vector<double> d_logits(layout_.belief_size(), 0.0);
  for (std::size_t i = 0; i < trace.blocks.size(); ++i) {
    const auto m = static_cast<std::size_t>(trace.counts[i]);
    const auto d = floored_softmax_backward(trace.blocks[i], d_attention.subspan(i * m_max, m), kAttentionFloor);
    for (std::size_t j = 0; j < m; ++j) d_logits[i * m_max + j] = d[j];
  }
  const auto d_memory = head_.backward(params_, trace.head, d_logits, g);
  std::vector<double> d_features, d_prev;
  gru_.backward(params_, trace.gru, d_memory, g, d_features, d_prev);
  features_.backward(params_, trace.features, d_features, g);
}

Critic::Critic(const NetworkLayout& layout) : layout_(layout) {
  layout_.validate();
  const auto w = static_cast<std::size_t>(layout_.width);
  const auto h = static_cast<std::size_t>(layout_.hidden);
  features_ = Mlp::create(params_, "critic.features", input_size(), w,
                          static_cast<std::size_t>(layout_.critic_feature_layers), w, true);
  gru_ = GruCell::create(params_, "critic.gru", w, h);
  head_ = Mlp::create(params_, "critic.head", h, w, static_cast<std::size_t>(layout_.critic_head_layers), 1, false);
}

Critic::Output Critic::forward(const CriticInput& in, Trace* trace) const {
  if (in.belief.size() != layout_.belief_size() || in.attention.size() != layout_.belief_size() ||
      in.observation.size() != layout_.observation_size() || in.memory.size() != static_cast<std::size_t>(layout_.hidden)) {
    throw std::invalid_argument("critic input layout mismatch");
  }
  std::vector<double> x(in.belief);
  x.insert(x.end(), in.observation.begin(), in.observation.end());
  x.insert(x.end(), in.attention.begin(), in.attention.end());

  const auto f = features_.forward(params_, x, trace ? &trace->features : nullptr);
  Output out;
  out.memory = gru_.forward(params_, f, in.memory, trace ? &trace->gru : nullptr);
  out.value = head_.forward(params_, out.memory, trace ? &trace->head : nullptr)[0];
  return out;
}

std::vector<double> Critic::backward(const Trace& trace, double d_value, Gradients& g) const {
  const std::vector<double> dv{d_value};
  const auto d_memory = head_.backward(params_, trace.head, dv, g);
  std::vector<double> d_features, d_prev;
  gru_.backward(params_, trace.gru, d_memory, g, d_features, d_prev);
  const auto dx = features_.backward(params_, trace.features, d_features, g);
  const std::size_t offset = layout_.belief_size() + layout_.observation_size();
  return {dx.begin() + static_cast<std::ptrdiff_t>(offset), dx.end()};
}

std::vector<double> draw_logit_noise(const NetworkLayout& layout, ScenarioStream& stream) {
  std::vector<double> eps(layout.belief_size());
  for (double& e : eps) e = stream.next_gaussian();
  return eps;
}

AttentionSample generate_attention(const Generator& g, const IntentionDistribution& b, const Observation& z,
                                   std::span<const double> noise, std::span<const double> memory) {
  GeneratorInput in;
  in.belief = encode_distribution(b, g.layout());
  in.observation = encode_observation(z, g.layout());
  in.counts = intention_counts(b);
  in.noise.assign(noise.begin(), noise.end());
  in.memory.assign(memory.begin(), memory.end());
  auto out = g.forward(in);
  return {decode_distribution(out.attention, in.counts, g.layout()), std::move(out.memory)};
}

}  // namespace leader::nn
