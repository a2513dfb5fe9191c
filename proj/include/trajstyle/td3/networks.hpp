#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajstyle/numkit/sequential.hpp"

namespace trajstyle::td3 {

using numkit::Mode;
using numkit::Rng;
using numkit::Tensor;

inline constexpr std::size_t kActionDims = 3;

struct NetConfig {
  std::vector<std::size_t> conv_channels{256, 128, 128};
  std::size_t kernel = 5;
  // Hidden dense widths. The critic takes the action after dense[0] and adds
  // one more dense[1]-wide layer before dense[2].
  std::vector<std::size_t> dense{512, 512, 400, 300};
  bool batch_norm = true;

  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

// Batched network input: content and generated trajectories normalized to
// the episode origin, plus the progress scalar t / 50.
struct StateBatch {
  Tensor content;    // [B,50,3]
  Tensor generated;  // [B,50,3]
  Tensor progress;   // [B,1]

  std::size_t size() const { return content.empty() ? 0 : content.dim(0); }
};

struct NetCache {
  numkit::SequentialCache content, generated, pre, head;
};

// Two convolutional branches (content, generated) whose flattened outputs are
// concatenated with the progress scalar and fed to a dense head. Actor heads
// end in tanh over 3 outputs; critic heads take the action after their first
// dense block and end in one linear output.
class BranchNet {
 public:
  enum class Role { actor, critic };

  BranchNet() = default;
  BranchNet(Role role, const NetConfig& cfg);

  Role role() const noexcept { return role_; }
  const NetConfig& config() const noexcept { return cfg_; }

  // Fan-in uniform on hidden layers, Uniform(+-final_span) on the output layer.
  void initialize(Rng& rng, double final_span);

  // action: [B,3], required for critics and ignored for actors.
  Tensor forward(const StateBatch& state, const Tensor* action, Mode mode, NetCache* cache = nullptr) const;

  // Accumulates parameter gradients into `grads` (aligned with
  // parameters()). Returns d/d(action) for critics when requested.
  Tensor backward(const NetCache& cache, const Tensor& grad_out, std::span<Tensor> grads,
                  bool need_action_grad = false) const;

  // Critic only: d(output)/d(action) without touching the branches.
  Tensor action_gradient(const NetCache& cache, const Tensor& grad_out) const;

  void update_running_stats(const NetCache& cache);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<Tensor> zero_grads() const;

  // Parameters followed by batch-norm running statistics, stably named.
  void for_each_tensor(const std::string& prefix, const std::function<void(const std::string&, Tensor&)>& visit);
  void for_each_tensor(const std::string& prefix,
                       const std::function<void(const std::string&, const Tensor&)>& visit) const;

 private:
  std::vector<numkit::Sequential*> parts();
  std::vector<const numkit::Sequential*> parts() const;

  Role role_ = Role::actor;
  NetConfig cfg_;
  numkit::Sequential content_;
  numkit::Sequential generated_;
  numkit::Sequential pre_;  // critic: dense[0] block before the action joins
  numkit::Sequential head_;
};

// target <- tau * online + (1 - tau) * target, over parameters and running
// statistics.
void soft_update(BranchNet& target, const BranchNet& online, double tau);

}  // namespace trajstyle::td3
