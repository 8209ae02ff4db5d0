#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "uavedge/env.hpp"
#include "uavedge/rng.hpp"

namespace uavedge {

// Bounded FIFO replay memory. Once full, each push overwrites the oldest record.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);

  // k records drawn uniformly with replacement. Throws std::logic_error when empty.
  std::vector<Transition> sample(std::size_t k, Rng& rng) const;

  // i-th record counted from the oldest retained one.
  const Transition& at(std::size_t i) const;

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return records_.empty(); }
  std::uint64_t total_pushed() const noexcept { return total_pushed_; }
  std::uint64_t evictions() const noexcept { return evictions_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> records_;
  std::size_t head_ = 0;  // slot of the oldest record once full
  std::uint64_t total_pushed_ = 0;
  std::uint64_t evictions_ = 0;
};

}  // namespace uavedge
