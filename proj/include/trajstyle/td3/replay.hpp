#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "trajstyle/numkit/rng.hpp"
#include "trajstyle/td3/networks.hpp"

namespace trajstyle::td3 {

// One network input: content and generated, both last-value padded to 50
// rows and normalized to the episode origin, plus progress t / 50.
struct State {
  Tensor content;    // [50,3]
  Tensor generated;  // [50,3]
  double progress = 0.0;

  bool operator==(const State&) const = default;
};

struct Transition {
  State state;
  std::array<double, kActionDims> action{};  // normalized, in [-1, 1]
  double reward = 0.0;
  State next_state;
  bool done = false;

  void validate() const;
  bool operator==(const Transition&) const = default;
};

// Fixed-capacity FIFO ring.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t pushes() const noexcept { return pushes_; }

  void push(Transition tr);
  // Oldest first.
  const Transition& at(std::size_t age_index) const;

  // k distinct positions drawn uniformly (partial Fisher-Yates). Throws
  // StateError when fewer than k transitions are stored.
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const;
  std::vector<const Transition*> sample(std::size_t k, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::size_t pushes_ = 0;
  std::vector<Transition> items_;
};

struct TransitionBatch {
  StateBatch state;
  Tensor action;  // [B,3]
  std::vector<double> reward;
  std::vector<double> done;  // 0 or 1
  StateBatch next_state;

  std::size_t size() const noexcept { return reward.size(); }
};

StateBatch make_state_batch(const std::vector<const State*>& states);
TransitionBatch make_batch(const std::vector<const Transition*>& transitions);

}  // namespace trajstyle::td3
