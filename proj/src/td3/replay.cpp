#include "trajstyle/td3/replay.hpp"

#include <cmath>
#include <numeric>

#include "trajstyle/error.hpp"

namespace trajstyle::td3 {

void Transition::validate() const {
  for (double a : action)
    if (!(a >= -1.0 && a <= 1.0)) throw ValueError("transition action outside [-1, 1]");
  if (!std::isfinite(reward)) throw NonFiniteError("transition reward is not finite");
  state.content.require_shape({50, 3}, "transition content");
  state.generated.require_shape({50, 3}, "transition generated");
  next_state.content.require_shape({50, 3}, "transition next content");
  next_state.generated.require_shape({50, 3}, "transition next generated");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValueError("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition tr) {
  tr.validate();
  if (items_.size() < capacity_) {
    items_.push_back(std::move(tr));
  } else {
    items_[head_] = std::move(tr);
    head_ = (head_ + 1) % capacity_;
  }
  ++pushes_;
}

const Transition& ReplayBuffer::at(std::size_t age_index) const {
  if (age_index >= items_.size()) throw ValueError("replay index out of range");
  return items_[(head_ + age_index) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t k, Rng& rng) const {
  if (k == 0) throw ValueError("sample size must be positive");
  if (k > items_.size())
    throw StateError("replay holds " + std::to_string(items_.size()) + " transitions, need " + std::to_string(k));
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(k);
  return idx;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
  std::vector<const Transition*> out;
  for (std::size_t i : sample_indices(k, rng)) out.push_back(&at(i));
  return out;
}

StateBatch make_state_batch(const std::vector<const State*>& states) {
  const std::size_t b = states.size();
  if (b == 0) throw ValueError("empty state batch");
  StateBatch out{Tensor({b, 50, 3}), Tensor({b, 50, 3}), Tensor({b, 1})};
  for (std::size_t i = 0; i < b; ++i) {
    const State& s = *states[i];
    s.content.require_shape({50, 3}, "state content");
    s.generated.require_shape({50, 3}, "state generated");
    std::copy(s.content.values().begin(), s.content.values().end(), out.content.data() + i * 150);
    std::copy(s.generated.values().begin(), s.generated.values().end(), out.generated.data() + i * 150);
    out.progress[i] = s.progress;
  }
  return out;
}

TransitionBatch make_batch(const std::vector<const Transition*>& transitions) {
  const std::size_t b = transitions.size();
  if (b == 0) throw ValueError("empty transition batch");
  std::vector<const State*> s, s2;
  TransitionBatch out;
  out.action = Tensor({b, kActionDims});
  for (std::size_t i = 0; i < b; ++i) {
    const Transition& tr = *transitions[i];
    s.push_back(&tr.state);
    s2.push_back(&tr.next_state);
    for (std::size_t a = 0; a < kActionDims; ++a) out.action.at(i, a) = tr.action[a];
    out.reward.push_back(tr.reward);
    out.done.push_back(tr.done ? 1.0 : 0.0);
  }
  out.state = make_state_batch(s);
  out.next_state = make_state_batch(s2);
  return out;
}

}  // namespace trajstyle::td3
