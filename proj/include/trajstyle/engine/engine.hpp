#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "trajstyle/error.hpp"
#include "trajstyle/lossnet/autoencoder.hpp"
#include "trajstyle/styleloss/styleloss.hpp"
#include "trajstyle/td3/checkpoint.hpp"
#include "trajstyle/td3/train.hpp"
#include "trajstyle/trajectory/trajectory.hpp"

namespace trajstyle::engine {

using numkit::Tensor;
using styleloss::LossBreakdown;
using trajectory::Trajectory;
using trajectory::Vec3;

class OutOfBoundsError : public ValueError {
 public:
  using ValueError::ValueError;
};

class StyleMismatchError : public ValueError {
 public:
  using ValueError::ValueError;
};

// A trained policy with its loss network, loaded once and shared read-only
// by any number of sessions.
class StylePolicy {
 public:
  StylePolicy(td3::PolicyCheckpoint checkpoint, lossnet::Autoencoder ae);
  StylePolicy(const StylePolicy&) = delete;
  StylePolicy& operator=(const StylePolicy&) = delete;

  static std::shared_ptr<const StylePolicy> load(const std::filesystem::path& policy_ckpt,
                                                 const std::filesystem::path& ae_ckpt);

  const std::string& style_id() const noexcept { return checkpoint_.style_id; }
  const td3::PolicyCheckpoint& checkpoint() const noexcept { return checkpoint_; }
  const lossnet::Autoencoder& autoencoder() const noexcept { return ae_; }
  const styleloss::LossModel& loss_model() const noexcept { return *model_; }
  const trajectory::WorkspaceConfig& workspace() const noexcept { return checkpoint_.workspace; }
  const Tensor& exemplar() const noexcept { return checkpoint_.style_mm; }

 private:
  td3::PolicyCheckpoint checkpoint_;
  lossnet::Autoencoder ae_;
  std::unique_ptr<styleloss::LossModel> model_;
};

struct StepOutput {
  std::size_t t = 0;  // index of the generated point
  Vec3 point{};
  LossBreakdown loss;
  bool terminal = false;
};

// One live 50-sample segment. Single owner; calls must be serialized.
class Session {
 public:
  static constexpr std::size_t kLastStep = trajectory::kSegmentLength - 1;

  Session(std::shared_ptr<const StylePolicy> policy, const std::string& style, const Vec3& first_point);

  // The t = 0 echo: G[0] = C[0] with the loss of that single point.
  StepOutput start_output() const;
  // Consumes C[t+1] and produces G[t+1].
  StepOutput step(const Vec3& content_point);

  std::size_t t() const noexcept { return episode_.t(); }
  bool terminal() const noexcept { return episode_.t() == kLastStep; }
  bool closed() const noexcept { return closed_ || terminal(); }
  void close() noexcept { closed_ = true; }

  const std::vector<Vec3>& content() const noexcept { return episode_.content(); }
  const std::vector<Vec3>& generated() const noexcept { return episode_.generated(); }
  const StylePolicy& policy() const noexcept { return *policy_; }

 private:
  std::shared_ptr<const StylePolicy> policy_;
  td3::Episode episode_;
  bool closed_ = false;
};

struct OfflineResult {
  Trajectory generated;             // 50 samples per segment at 10 Hz
  std::vector<LossBreakdown> steps;  // 49 per segment
  std::size_t segments = 0;
};

// Content must already be at 10 Hz. Each segment restarts at its own first
// content point.
OfflineResult stylize_offline(const Trajectory& content, const std::string& style,
                              const std::shared_ptr<const StylePolicy>& policy);

struct EvaluationReport {
  LossBreakdown generated;  // terminal breakdown of the generated segment
  LossBreakdown content;    // the raw content scored the same way
};

// All inputs are 50-sample segments in millimetres.
EvaluationReport evaluate(const Tensor& generated_mm, const Tensor& content_mm, const Tensor& style_mm,
                          const lossnet::Autoencoder& ae, const styleloss::LossWeights& weights, double rt);

}  // namespace trajstyle::engine
