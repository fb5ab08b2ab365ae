#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "leader/episode.h"
#include "leader/networks.h"
#include "leader/planner.h"
#include "leader/replay_buffer.h"

namespace leader {

struct TrainConfig {
  int warmup_steps = 2000;        // environment steps collected with uniform attention
  int total_steps = 20000;
  int batch_size = 64;
  double critic_learning_rate = 1e-3;
  double generator_learning_rate = 1e-4;
  int generator_noise_samples = 1;  // noise draws per batch element
  int actors = 1;
  std::size_t buffer_capacity = 50000;
  int checkpoint_every = 5000;    // learner steps; 0 disables periodic checkpoints
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "runs/train";

  void validate() const;
};

/// Network inputs for a stored entry.
nn::GeneratorInput generator_input(const nn::NetworkLayout& layout, const ReplayEntry& entry,
                                   std::span<const double> noise);
nn::CriticInput critic_input(const nn::NetworkLayout& layout, const ReplayEntry& entry);

/// Mean squared error between the critic and the stored planner values.
/// Accumulates its gradient into `grads` when given.
double critic_loss(const nn::Critic& critic, std::span<const ReplayEntry> batch, nn::Gradients* grads);

/// Mean critic value of freshly generated attention, one row of `noise` per
/// batch element and draw. Accumulates the generator gradient through the
/// frozen critic into `grads` when given.
double generator_objective(const nn::Generator& generator, const nn::Critic& critic,
                           std::span<const ReplayEntry> batch, std::span<const std::vector<double>> noise,
                           nn::Gradients* grads);

/// One optimiser step on the critic. Throws std::runtime_error on a non-finite loss.
double critic_update(nn::Critic& critic, nn::AdamState& state, std::span<const ReplayEntry> batch,
                     const nn::AdamOptions& options);

/// One descent step on the generator against the frozen critic. Throws
/// std::runtime_error on a non-finite objective.
double generator_update(nn::Generator& generator, nn::AdamState& state, const nn::Critic& critic,
                        std::span<const ReplayEntry> batch, ScenarioStream& noise_stream, int samples,
                        const nn::AdamOptions& options);

/// Recurrent state an actor carries through an episode.
struct ActorMemory {
  std::vector<double> generator;
  std::vector<double> critic;
  static ActorMemory zeros(const nn::NetworkLayout& layout);
};

struct ActorStep {
  ReplayEntry entry;
  PlanResult plan;
  Episode::StepResult outcome;
};

/// Attention source for an actor step; a null generator means uniform attention.
struct AttentionSource {
  const nn::Generator* generator = nullptr;
  bool sample_noise = true;  // false feeds zero logit noise
};

/// Generates attention for the current belief, plans with it, executes the
/// chosen action and records (b, z, q, value). The critic only advances its
/// memory here.
ActorStep actor_step(Episode& episode, const AttentionSource& source, const nn::Critic& critic, ActorMemory& memory,
                     const DrivingModel& model, const PlannerConfig& planner, ScenarioStream& noise_stream);

/// Fan-in uniform initialisation of both networks from one training seed.
void initialize_networks(nn::Generator& generator, nn::Critic& critic, std::uint64_t seed);

/// Seed of the planner at step `step` of the episode seeded with `episode_seed`.
std::uint64_t planner_seed(std::uint64_t episode_seed, int step);
/// Seed of the `index`-th episode of a run seeded with `seed`.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index);

struct CurveRecord {
  std::uint64_t iteration = 0;   // environment steps completed
  double cumulative_reward = 0.0;
  bool collision = false;
  double avg_speed = 0.0;
  double critic_loss = 0.0;      // mean over the episode's learner steps, NaN if none
  double generator_objective = 0.0;
};

struct TrainResult {
  std::vector<CurveRecord> curve;
  int critic_steps = 0;
  int generator_steps = 0;
  std::uint64_t environment_steps = 0;
  std::size_t buffer_size = 0;
};

/// Runs the actor/learner loop over the given scenarios. Writes
/// learning_curve.csv and checkpoints (ckpt_<step>.bin, final.bin) into
/// config.output_dir; the networks are left in their final state.
TrainResult train(const TrainConfig& config, const PlannerConfig& planner, const DrivingModel& model,
                  std::span<const ScenarioSpec> scenarios, nn::Generator& generator, nn::Critic& critic,
                  const EpisodeOptions& episode_options = {});

void write_curve_csv(const std::filesystem::path& file, std::span<const CurveRecord> curve);

}  // namespace leader
