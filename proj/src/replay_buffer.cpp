#include "leader/replay_buffer.h"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace leader {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(ReplayEntry entry) {
  std::lock_guard lock(mutex_);
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(entry));
  ++inserted_;
}

std::optional<std::vector<ReplayEntry>> ReplayBuffer::sample(std::size_t batch, ScenarioStream& stream) const {
  std::lock_guard lock(mutex_);
  if (batch == 0 || entries_.size() < batch) return std::nullopt;
  std::vector<ReplayEntry> out;
  out.reserve(batch);
  for (std::size_t i : sample_indices(entries_.size(), batch, stream)) out.push_back(entries_[i]);
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::uint64_t ReplayBuffer::inserted() const {
  std::lock_guard lock(mutex_);
  return inserted_;
}

std::vector<ReplayEntry> ReplayBuffer::contents() const {
  std::lock_guard lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, ScenarioStream& stream) {
  if (count > n) throw std::invalid_argument("cannot draw more indices than available");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    auto j = i + static_cast<std::size_t>(stream.next_uniform() * static_cast<double>(n - i));
    if (j >= n) j = n - 1;
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace leader
