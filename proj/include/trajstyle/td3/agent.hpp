#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trajstyle/numkit/adam.hpp"
#include "trajstyle/td3/networks.hpp"
#include "trajstyle/td3/replay.hpp"

namespace trajstyle::td3 {

// Noise levels and the action range are in millimetres; the networks see them
// divided by action_range.
struct TrainConfig {
  std::size_t episodes = 2500;
  std::size_t batch = 64;
  std::size_t replay_capacity = 1000;
  std::size_t horizon = 49;  // steps per episode
  double critic_lr = 1e-5;
  double actor_lr = 1e-6;
  double gamma = 0.99;
  double tau = 1e-3;
  std::size_t critic_actor_ratio = 2;
  double policy_noise_std = 0.6;
  double policy_noise_clip = 1.5;
  double action_noise_std = 6.0;
  double action_range = 30.0;
  double init_span = 3e-3;
  std::uint64_t seed = 0;

  // Defaults with the RT-proportional entries scaled to `rt`.
  static TrainConfig for_rt(double rt);
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct Td3Nets {
  BranchNet actor, critic1, critic2;
  BranchNet actor_target, critic1_target, critic2_target;
  numkit::AdamState actor_adam, critic1_adam, critic2_adam;
  std::uint64_t critic_updates = 0;
  std::uint64_t actor_updates = 0;

  Td3Nets() = default;
  explicit Td3Nets(const NetConfig& cfg);

  // Online nets drawn from rng, targets copied from them, fresh Adam state.
  void initialize(Rng& rng, double init_span);

  // Infer-mode actor output in (-1, 1)^3 per row.
  Tensor act(const StateBatch& state) const;
};

// y = r + gamma * min(q1, q2) * (1 - done)
double td3_target(double reward, double done, double gamma, double q1, double q2);

struct UpdateDiagnostics {
  std::vector<double> target_q1, target_q2, y;
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  bool actor_updated = false;
  double actor_q = 0.0;  // mean Q1(s, actor(s)) before the actor step
};

// One TD3 step: both critics regress to the smoothed double-Q target; every
// critic_actor_ratio-th call the actor ascends Q1 and all targets soft-update.
// rng supplies the target-policy smoothing noise.
UpdateDiagnostics td3_update(Td3Nets& nets, const TransitionBatch& batch, const TrainConfig& cfg, Rng& rng);

}  // namespace trajstyle::td3
