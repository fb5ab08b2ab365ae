#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "leader/belief.h"
#include "leader/driving_model.h"
#include "leader/stream.h"

namespace leader {

/// One planning step as seen by the learner. The recurrent memories are the
/// states fed to the networks at this step, so a stored entry can be replayed
/// without its history.
struct ReplayEntry {
  IntentionDistribution belief;
  Observation observation;
  IntentionDistribution attention;
  double value = 0.0;
  std::uint64_t episode = 0;
  int step = 0;
  std::vector<double> generator_memory;
  std::vector<double> critic_memory;
};

/// Fixed-capacity ring; the oldest entry is evicted first. push and sample
/// are safe to call from different threads.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(ReplayEntry entry);
  /// Uniform sample without replacement, or nullopt while fewer than
  /// `batch` entries are stored.
  std::optional<std::vector<ReplayEntry>> sample(std::size_t batch, ScenarioStream& stream) const;

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const;
  std::vector<ReplayEntry> contents() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::deque<ReplayEntry> entries_;
  std::uint64_t inserted_ = 0;
};

/// `count` distinct indices drawn uniformly from [0, n) by a partial
/// Fisher-Yates shuffle.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, ScenarioStream& stream);

}  // namespace leader
