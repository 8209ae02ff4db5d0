#include "uavedge/replay.hpp"

#include <stdexcept>
#include <utility>

namespace uavedge {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  ++total_pushed_;
  if (records_.size() < capacity_) {
    records_.push_back(std::move(t));
    return;
  }
  records_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
  ++evictions_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
  if (records_.empty()) throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(records_[rng.index(records_.size())]);
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= records_.size()) throw std::out_of_range("ReplayBuffer::at");
  return records_[(head_ + i) % records_.size()];
}

}  // namespace uavedge
