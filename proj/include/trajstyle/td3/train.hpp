#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "trajstyle/lossnet/autoencoder.hpp"
#include "trajstyle/styleloss/styleloss.hpp"
#include "trajstyle/td3/checkpoint.hpp"
#include "trajstyle/trajectory/trajectory.hpp"

namespace trajstyle::td3 {

using trajectory::Vec3;
using Action = std::array<double, kActionDims>;

// Growing content/generated buffers of one 50-sample segment. Training
// episodes and live sessions both step through this, so they produce the
// same points for the same actions.
class Episode {
 public:
  Episode(const Vec3& first_content, const trajectory::WorkspaceConfig& ws, double action_range);

  const std::vector<Vec3>& content() const noexcept { return content_; }
  const std::vector<Vec3>& generated() const noexcept { return generated_; }
  // Index of the newest generated point.
  std::size_t t() const noexcept { return generated_.size() - 1; }
  bool full() const noexcept { return generated_.size() >= trajectory::kSegmentLength; }

  // Content must lead generated by exactly one point before advance().
  void push_content(const Vec3& point);
  // Network input: both buffers padded to 50, relative to C[0] over rt, and
  // progress t / 50.
  State state() const;
  // G[t+1] = clamp(G[t] + a * AR). Returns the new point.
  const Vec3& advance(const Action& a);

  // Padded [50,3] buffers in millimetres.
  Tensor content_mm() const;
  Tensor generated_mm() const;

 private:
  trajectory::WorkspaceConfig ws_;
  double action_range_;
  std::vector<Vec3> content_;
  std::vector<Vec3> generated_;
};

// Deterministic actor output for one state.
Action policy_action(const BranchNet& actor, const State& state);

// Loss of the step that just produced G[t]; terminal at `horizon` steps.
styleloss::LossBreakdown step_loss(const styleloss::LossModel& model, const Episode& ep, bool terminal);

// Noise-free rollout of `horizon` steps; returns the generated points G[0..horizon].
std::vector<Vec3> greedy_rollout(const BranchNet& actor, const std::vector<Vec3>& content,
                                 const trajectory::WorkspaceConfig& ws, double action_range, std::size_t horizon);

using ContentSource = std::function<std::vector<Vec3>(Rng&)>;
using EpisodeCallback = std::function<void(std::size_t episode, double reward, const Td3Nets& nets)>;

struct PolicyTrainResult {
  PolicyCheckpoint checkpoint;
  std::vector<double> episode_rewards;  // sum of step rewards
};

// Trains one policy for one style exemplar ([50,3] mm). content_source
// defaults to random linear motions inside the workspace.
PolicyTrainResult train_policy(const std::string& style_id, const Tensor& style_mm, const lossnet::Autoencoder& ae,
                               const styleloss::LossWeights& weights, const TrainConfig& cfg, const NetConfig& net,
                               const trajectory::WorkspaceConfig& ws, ContentSource content_source = {},
                               EpisodeCallback on_episode = {});

}  // namespace trajstyle::td3
