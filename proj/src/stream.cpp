#include "leader/stream.h"

#include <cmath>
#include <numbers>

namespace leader {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t ScenarioStream::next_u64() {
  const std::uint64_t out = mix64(seed_ + kGolden * (cursor_ + 1));
  ++cursor_;
  return out;
}

double ScenarioStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double ScenarioStream::next_gaussian() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  // 1 - u1 lies in (0, 1], so the log is finite.
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

ScenarioStream ScenarioStream::split(std::uint64_t key) const {
  const std::uint64_t child = mix64(seed_ ^ mix64(key * kGolden + 0x632BE59BD9B4E019ULL));
  return ScenarioStream(child);
}

}  // namespace leader
