#include "leader/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "leader/attention.h"
#include "leader/checkpoint.h"

namespace leader {
namespace {

constexpr std::uint64_t kPlannerKey = 0x504c414eull;
constexpr std::uint64_t kEpisodeKey = 0x45504953ull;
constexpr std::uint64_t kActorNoiseKey = 0x41435452ull;
constexpr std::uint64_t kLearnerKey = 0x4c524e52ull;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what);
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double mean_over(const std::vector<double>& values, std::uint64_t first, std::uint64_t last) {
  double total = 0.0;
  int count = 0;
  for (std::uint64_t i = first; i < last && i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    total += values[i];
    ++count;
  }
  return count ? total / count : nan();
}

struct EpisodeTally {
  std::uint64_t first_step = 0;
  std::uint64_t end_step = 0;
  double discount = 1.0;
  double discounted_return = 0.0;
  double speed_sum = 0.0;
  int steps = 0;
  bool collision = false;

  void add(const ActorStep& s, double gamma, double speed) {
    discounted_return += discount * s.outcome.reward;
    discount *= gamma;
    speed_sum += speed;
    ++steps;
    collision = collision || s.outcome.collision;
  }
};

}  // namespace

void TrainConfig::validate() const {
  if (total_steps < 1 || batch_size < 1 || actors < 1 || generator_noise_samples < 1 || buffer_capacity < 1) {
    throw std::invalid_argument("training sizes must be positive");
  }
  if (warmup_steps < 0 || warmup_steps > total_steps) throw std::invalid_argument("warm-up must lie in [0, total_steps]");
  if (!(critic_learning_rate > 0.0) || !(generator_learning_rate > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint interval must be non-negative");
}

nn::GeneratorInput generator_input(const nn::NetworkLayout& layout, const ReplayEntry& entry,
                                   std::span<const double> noise) {
  nn::GeneratorInput in;
  in.belief = nn::encode_distribution(entry.belief, layout);
  in.observation = nn::encode_observation(entry.observation, layout);
  in.counts = nn::intention_counts(entry.belief);
  in.noise.assign(noise.begin(), noise.end());
  in.memory = entry.generator_memory;
  return in;
}

nn::CriticInput critic_input(const nn::NetworkLayout& layout, const ReplayEntry& entry) {
  nn::CriticInput in;
  in.belief = nn::encode_distribution(entry.belief, layout);
  in.observation = nn::encode_observation(entry.observation, layout);
  in.attention = nn::encode_distribution(entry.attention, layout);
  in.memory = entry.critic_memory;
  return in;
}

double critic_loss(const nn::Critic& critic, std::span<const ReplayEntry> batch, nn::Gradients* grads) {
  if (batch.empty()) throw std::invalid_argument("critic loss needs a non-empty batch");
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& entry : batch) {
    nn::Critic::Trace trace;
    const auto out = critic.forward(critic_input(critic.layout(), entry), grads ? &trace : nullptr);
    const double diff = out.value - entry.value;
    loss += diff * diff;
    if (grads) critic.backward(trace, 2.0 * diff / n, *grads);
  }
  return loss / n;
}

double generator_objective(const nn::Generator& generator, const nn::Critic& critic,
                           std::span<const ReplayEntry> batch, std::span<const std::vector<double>> noise,
                           nn::Gradients* grads) {
  if (batch.empty()) throw std::invalid_argument("generator objective needs a non-empty batch");
  if (noise.empty() || noise.size() % batch.size() != 0) {
    throw std::invalid_argument("noise rows must be a positive multiple of the batch size");
  }
  const std::size_t samples = noise.size() / batch.size();
  const double n = static_cast<double>(noise.size());
  nn::Gradients critic_scratch;
  if (grads) critic_scratch = nn::zeros_like(critic.params());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t s = 0; s < samples; ++s) {
      const auto gin = generator_input(generator.layout(), batch[i], noise[i * samples + s]);
      nn::Generator::Trace gtrace;
      const auto gout = generator.forward(gin, grads ? &gtrace : nullptr);
      nn::CriticInput cin{gin.belief, gin.observation, gout.attention, batch[i].critic_memory};
      nn::Critic::Trace ctrace;
      total += critic.forward(cin, grads ? &ctrace : nullptr).value;
      if (grads) {
        const auto d_attention = critic.backward(ctrace, 1.0 / n, critic_scratch);
        generator.backward(gin, gtrace, d_attention, *grads);
      }
    }
  }
  return total / n;
}

double critic_update(nn::Critic& critic, nn::AdamState& state, std::span<const ReplayEntry> batch,
                     const nn::AdamOptions& options) {
  auto grads = nn::zeros_like(critic.params());
  const double loss = critic_loss(critic, batch, &grads);
  require_finite(loss, "critic loss");
  nn::adam_step(critic.params(), grads, state, options);
  return loss;
}

double generator_update(nn::Generator& generator, nn::AdamState& state, const nn::Critic& critic,
                        std::span<const ReplayEntry> batch, ScenarioStream& noise_stream, int samples,
                        const nn::AdamOptions& options) {
  if (samples < 1) throw std::invalid_argument("at least one noise sample per entry");
  std::vector<std::vector<double>> noise;
  noise.reserve(batch.size() * static_cast<std::size_t>(samples));
  for (std::size_t i = 0; i < batch.size() * static_cast<std::size_t>(samples); ++i) {
    noise.push_back(nn::draw_logit_noise(generator.layout(), noise_stream));
  }
  auto grads = nn::zeros_like(generator.params());
  const double objective = generator_objective(generator, critic, batch, noise, &grads);
  require_finite(objective, "generator objective");
  nn::adam_step(generator.params(), grads, state, options);
  return objective;
}

ActorMemory ActorMemory::zeros(const nn::NetworkLayout& layout) {
  const auto h = static_cast<std::size_t>(layout.hidden);
  return {std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)};
}

void initialize_networks(nn::Generator& generator, nn::Critic& critic, std::uint64_t seed) {
  nn::init_fan_in_uniform(generator.params(), mix64(seed ^ 0x47454eull));
  nn::init_fan_in_uniform(critic.params(), mix64(seed ^ 0x435254ull));
}

std::uint64_t planner_seed(std::uint64_t episode_seed, int step) {
  return mix64(episode_seed ^ mix64(kPlannerKey + static_cast<std::uint64_t>(step)));
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed ^ kEpisodeKey) + index);
}

ActorStep actor_step(Episode& episode, const AttentionSource& source, const nn::Critic& critic, ActorMemory& memory,
                     const DrivingModel& model, const PlannerConfig& planner, ScenarioStream& noise_stream) {
  const nn::NetworkLayout& layout = critic.layout();
  ActorStep out;
  ReplayEntry& entry = out.entry;
  entry.belief = episode.belief();
  entry.observation = episode.observation();
  entry.generator_memory = memory.generator;
  entry.critic_memory = memory.critic;
  entry.episode = episode.seed();
  entry.step = episode.step_index();

  if (source.generator) {
    const auto noise = source.sample_noise ? nn::draw_logit_noise(layout, noise_stream)
                                           : std::vector<double>(layout.belief_size(), 0.0);
    auto sample = nn::generate_attention(*source.generator, entry.belief, entry.observation, noise, memory.generator);
    entry.attention = std::move(sample.attention);
    memory.generator = std::move(sample.memory);
  } else {
    entry.attention = uniform_attention(entry.belief);
  }
  memory.critic = critic.forward(critic_input(layout, entry)).memory;

  out.plan = plan(model, entry.belief, entry.observation, entry.attention, episode.agents(), planner,
                  planner_seed(episode.seed(), episode.step_index()));
  entry.value = out.plan.value_estimate;
  out.outcome = episode.step(out.plan.action);
  return out;
}

void write_curve_csv(const std::filesystem::path& file, std::span<const CurveRecord> curve) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write learning curve: " + file.string());
  out << "iteration,cumulative_reward,collision,avg_speed,critic_loss,generator_objective\n";
  out << std::setprecision(17);
  for (const auto& r : curve) {
    out << r.iteration << ',' << r.cumulative_reward << ',' << (r.collision ? 1 : 0) << ',' << r.avg_speed << ','
        << r.critic_loss << ',' << r.generator_objective << '\n';
  }
}

TrainResult train(const TrainConfig& config, const PlannerConfig& planner, const DrivingModel& model,
                  std::span<const ScenarioSpec> scenarios, nn::Generator& generator, nn::Critic& critic,
                  const EpisodeOptions& episode_options) {
  config.validate();
  planner.validate();
  if (scenarios.empty()) throw std::invalid_argument("training needs at least one scenario");
  std::filesystem::create_directories(config.output_dir);

  const auto total = static_cast<std::uint64_t>(config.total_steps);
  const auto warmup = static_cast<std::uint64_t>(config.warmup_steps);
  ReplayBuffer buffer(config.buffer_capacity);
  nn::AdamState critic_state, generator_state;
  const nn::AdamOptions critic_options{config.critic_learning_rate};
  const nn::AdamOptions generator_options{config.generator_learning_rate};
  const ScenarioStream learner_root(mix64(config.seed ^ kLearnerKey));
  ScenarioStream sample_stream = learner_root.split(0);
  ScenarioStream generator_noise = learner_root.split(1);

  TrainResult result;
  std::vector<double> critic_losses(total, nan());
  std::vector<double> generator_objectives(total, nan());
  std::mutex params_mutex;

  // One learner step per environment step: critic, then generator once warm-up is over.
  auto learner_step = [&](std::uint64_t step) {
    auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), sample_stream);
    if (!batch) return;
    std::lock_guard lock(params_mutex);
    critic_losses[step] = critic_update(critic, critic_state, *batch, critic_options);
    ++result.critic_steps;
    if (step >= warmup) {
      generator_objectives[step] = generator_update(generator, generator_state, critic, *batch, generator_noise,
                                                    config.generator_noise_samples, generator_options);
      ++result.generator_steps;
    }
    if (config.checkpoint_every > 0 && (step + 1) % static_cast<std::uint64_t>(config.checkpoint_every) == 0) {
      nn::save_checkpoint(config.output_dir / ("ckpt_" + std::to_string(step + 1) + ".bin"), generator, critic,
                          config.seed);
    }
  };

  std::vector<EpisodeTally> tallies;
  std::mutex tally_mutex;
  std::atomic<std::uint64_t> next_step{0};
  std::atomic<std::uint64_t> next_episode{0};

  // Runs one episode with network snapshots taken at its start; `on_step` is
  // called after every recorded step with the step's global index.
  auto run_episode = [&](auto&& on_step) {
    const std::uint64_t index = next_episode.fetch_add(1);
    const ScenarioSpec& spec = scenarios[index % scenarios.size()];
    const std::uint64_t seed = episode_seed(config.seed, index);
    Episode episode(spec, model, seed, episode_options);
    std::unique_lock lock(params_mutex);
    const nn::Generator generator_snapshot = generator;
    const nn::Critic critic_snapshot = critic;
    lock.unlock();
    ActorMemory memory = ActorMemory::zeros(critic.layout());
    ScenarioStream noise(mix64(seed ^ kActorNoiseKey));
    EpisodeTally tally;
    bool first = true;
    while (!episode.done()) {
      const std::uint64_t step = next_step.fetch_add(1);
      if (step >= total) break;
      AttentionSource source;
      if (step >= warmup) source.generator = &generator_snapshot;
      const ActorStep s = actor_step(episode, source, critic_snapshot, memory, model, planner, noise);
      buffer.push(s.entry);
      if (first) tally.first_step = step;
      first = false;
      tally.end_step = step + 1;
      tally.add(s, planner.gamma, episode.state().ego.speed);
      on_step(step);
    }
    if (tally.steps > 0) {
      std::lock_guard tlock(tally_mutex);
      tallies.push_back(tally);
    }
  };

  if (config.actors == 1) {
    while (next_step.load() < total) run_episode([&](std::uint64_t step) { learner_step(step); });
  } else {
    std::mutex progress_mutex;
    std::condition_variable progress;
    std::uint64_t collected = 0;
    std::exception_ptr failure;
    std::vector<std::thread> actors;
    for (int a = 0; a < config.actors; ++a) {
      actors.emplace_back([&] {
        auto notify = [&](std::uint64_t) {
          {
            std::lock_guard plock(progress_mutex);
            ++collected;
          }
          progress.notify_one();
        };
        try {
          while (next_step.load() < total) run_episode(notify);
        } catch (...) {
          std::lock_guard plock(progress_mutex);
          if (!failure) failure = std::current_exception();
          next_step.store(total);
        }
        {
          std::lock_guard plock(progress_mutex);
          collected = std::max(collected, total);
        }
        progress.notify_one();
      });
    }
    for (std::uint64_t step = 0; step < total; ++step) {
      {
        std::unique_lock plock(progress_mutex);
        progress.wait(plock, [&] { return collected > step; });
      }
      learner_step(step);
    }
    for (auto& t : actors) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::sort(tallies.begin(), tallies.end(),
            [](const EpisodeTally& a, const EpisodeTally& b) { return a.first_step < b.first_step; });
  for (const auto& t : tallies) {
    CurveRecord r;
    r.iteration = t.end_step;
    r.cumulative_reward = t.discounted_return;
    r.collision = t.collision;
    r.avg_speed = t.speed_sum / t.steps;
    r.critic_loss = mean_over(critic_losses, t.first_step, t.end_step);
    r.generator_objective = mean_over(generator_objectives, t.first_step, t.end_step);
    result.curve.push_back(r);
  }
  result.environment_steps = std::min(next_step.load(), total);
  result.buffer_size = buffer.size();
  write_curve_csv(config.output_dir / "learning_curve.csv", result.curve);
  nn::save_checkpoint(config.output_dir / "final.bin", generator, critic, config.seed);
  return result;
}

}  // namespace leader
