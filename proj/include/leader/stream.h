#pragma once

#include <cstdint>

namespace leader {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based pseudo-random stream. The n-th draw is a pure function of
/// (seed, n), so a copy of a stream replays the exact same numbers. Child
/// streams obtained with split() are independent and never consume from the
/// parent.
class ScenarioStream {
 public:
  explicit ScenarioStream(std::uint64_t seed, std::uint64_t cursor = 0)
      : seed_(seed), cursor_(cursor) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t cursor() const { return cursor_; }

  /// Uniform on [0, 1) with 53 bits of resolution; advances the cursor by one.
  double next_uniform();

  /// Standard normal via Box-Muller; always consumes exactly two uniforms.
  double next_gaussian();

  /// Raw 64-bit draw; advances the cursor by one.
  std::uint64_t next_u64();

  /// Child stream keyed by `key`, starting at cursor 0.
  ScenarioStream split(std::uint64_t key) const;

  /// Sub-stream for scenario `index`, as used by the planner.
  static ScenarioStream for_scenario(std::uint64_t seed, std::uint64_t index) {
    return ScenarioStream(seed).split(index);
  }

  /// Sub-stream consumed by the transition out of depth `depth`.
  ScenarioStream at_depth(int depth) const { return split(static_cast<std::uint64_t>(depth)); }

  friend bool operator==(const ScenarioStream&, const ScenarioStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t cursor_;
};

}  // namespace leader
