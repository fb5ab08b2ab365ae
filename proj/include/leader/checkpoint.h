#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "leader/networks.h"

namespace leader::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointHeader {
  NetworkLayout layout;
  std::uint64_t generator_version = 0;
  std::uint64_t critic_version = 0;
  std::uint64_t seed = 0;
};

/// Text header (magic line and one JSON line) followed by every generator
/// array and then every critic array as little-endian float32, in declaration order.
void save_checkpoint(const std::filesystem::path& file, const Generator& generator, const Critic& critic,
                     std::uint64_t seed);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& file);

/// Fills networks built from the stored layout. Throws CheckpointError when
/// the file is missing, truncated, or disagrees with the networks' layout.
CheckpointHeader load_checkpoint(const std::filesystem::path& file, Generator& generator, Critic& critic);

}  // namespace leader::nn
