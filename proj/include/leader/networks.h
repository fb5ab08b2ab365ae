#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "leader/belief.h"
#include "leader/driving_model.h"
#include "leader/neural.h"

namespace leader::nn {

/// Fixed input layout and layer sizes shared by generator and critic.
struct NetworkLayout {
  int slots = 6;             // exo-agent slots N
  int max_intentions = 3;    // M_max per agent
  int width = 64;
  int hidden = 64;           // GRU memory size
  int generator_feature_layers = 4;
  int generator_head_layers = 2;
  int critic_feature_layers = 3;
  int critic_head_layers = 2;
  double noise_sigma = 0.5;  // scale of the logit noise
  double position_scale = 20.0;
  double v_max = 6.0;

  std::size_t belief_size() const { return static_cast<std::size_t>(slots * max_intentions); }
  static constexpr std::size_t kEgoFeatures = 5;
  static constexpr std::size_t kAgentFeatures = 6;
  std::size_t observation_size() const { return kEgoFeatures + static_cast<std::size_t>(slots) * kAgentFeatures; }
  void validate() const;
  friend bool operator==(const NetworkLayout&, const NetworkLayout&) = default;
};

/// Belief or attention as a slots x max_intentions block, zero-padded.
std::vector<double> encode_distribution(const IntentionDistribution& d, const NetworkLayout& layout);
/// Inverse of encode_distribution given the per-agent intention counts.
IntentionDistribution decode_distribution(std::span<const double> flat, std::span<const int> counts,
                                          const NetworkLayout& layout);
/// Ego features (position, speed, heading) followed by each agent slot in the
/// ego frame: presence flag, relative position, speed, relative heading.
std::vector<double> encode_observation(const Observation& z, const NetworkLayout& layout);
std::vector<int> intention_counts(const IntentionDistribution& d);

struct GeneratorInput {
  std::vector<double> belief;       // encode_distribution(b)
  std::vector<double> observation;  // encode_observation(z)
  std::vector<int> counts;          // intentions per present agent
  std::vector<double> noise;        // slots * max_intentions standard-normal draws
  std::vector<double> memory;       // GRU state
};

struct CriticInput {
  std::vector<double> belief;
  std::vector<double> observation;
  std::vector<double> attention;
  std::vector<double> memory;
};

/// Per-agent softmax over the first `count` logits followed by the attention
/// floor; records which entries ended on the floor for the backward pass.
struct FlooredSoftmax {
  std::vector<double> softmax;
  std::vector<double> output;
  std::vector<bool> pinned;
};
FlooredSoftmax floored_softmax(std::span<const double> logits, double floor);
/// dL/dlogits from dL/doutput.
std::vector<double> floored_softmax_backward(const FlooredSoftmax& fs, std::span<const double> d_output, double floor);

class Generator {
 public:
  explicit Generator(const NetworkLayout& layout);

  struct Trace {
    Mlp::Trace features;
    GruCell::Trace gru;
    Mlp::Trace head;
    std::vector<FlooredSoftmax> blocks;
    std::vector<int> counts;
  };
  struct Output {
    std::vector<double> attention;  // padded slots x max_intentions
    std::vector<double> memory;
  };

  const NetworkLayout& layout() const { return layout_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  std::size_t input_size() const { return layout_.belief_size() + layout_.observation_size(); }

  Output forward(const GeneratorInput& in, Trace* trace = nullptr) const;
  /// Accumulates dL/dparams for the given dL/dattention.
  void backward(const GeneratorInput& in, const Trace& trace, std::span<const double> d_attention, Gradients& g) const;

 private:
  NetworkLayout layout_;
  ParamSet params_;
  Mlp features_;
  GruCell gru_;
  Mlp head_;
};

class Critic {
 public:
  explicit Critic(const NetworkLayout& layout);

  struct Trace {
    Mlp::Trace features;
    GruCell::Trace gru;
    Mlp::Trace head;
  };
  struct Output {
    double value = 0.0;
    std::vector<double> memory;
  };

  const NetworkLayout& layout() const { return layout_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  std::size_t input_size() const { return 2 * layout_.belief_size() + layout_.observation_size(); }

  Output forward(const CriticInput& in, Trace* trace = nullptr) const;
  /// Accumulates dL/dparams for the given dL/dvalue and returns dL/dattention.
  std::vector<double> backward(const Trace& trace, double d_value, Gradients& g) const;

 private:
  NetworkLayout layout_;
  ParamSet params_;
  Mlp features_;
  GruCell gru_;
  Mlp head_;
};

/// Standard-normal logit noise for one generator call.
std::vector<double> draw_logit_noise(const NetworkLayout& layout, ScenarioStream& stream);

/// Convenience wrapper: attention distribution for (b, z) with the given noise and memory.
struct AttentionSample {
  IntentionDistribution attention;
  std::vector<double> memory;
};
AttentionSample generate_attention(const Generator& g, const IntentionDistribution& b, const Observation& z,
                                   std::span<const double> noise, std::span<const double> memory);

}  // namespace leader::nn
