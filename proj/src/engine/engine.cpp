#include "trajstyle/engine/engine.hpp"

namespace trajstyle::engine {

StylePolicy::StylePolicy(td3::PolicyCheckpoint checkpoint, lossnet::Autoencoder ae)
    : checkpoint_(std::move(checkpoint)), ae_(std::move(ae)) {
  if (!ae_.trained()) throw StateError("policy needs a trained autoencoder");
  model_ = std::make_unique<styleloss::LossModel>(ae_, checkpoint_.style_mm, checkpoint_.weights,
                                                  checkpoint_.workspace.rt);
}

std::shared_ptr<const StylePolicy> StylePolicy::load(const std::filesystem::path& policy_ckpt,
                                                     const std::filesystem::path& ae_ckpt) {
  return std::make_shared<const StylePolicy>(td3::load_checkpoint(policy_ckpt), lossnet::Autoencoder::load(ae_ckpt));
}

namespace {

const Vec3& checked_point(const StylePolicy& policy, const Vec3& p) {
  if (!policy.workspace().contains(p)) throw OutOfBoundsError("content point outside the workspace");
  return p;
}

std::shared_ptr<const StylePolicy> checked_policy(std::shared_ptr<const StylePolicy> policy, const std::string& style) {
  if (!policy) throw ValueError("session needs a policy");
  if (policy->style_id() != style)
    throw StyleMismatchError("checkpoint holds style '" + policy->style_id() + "', not '" + style + "'");
  return policy;
}

}  // namespace

Session::Session(std::shared_ptr<const StylePolicy> policy, const std::string& style, const Vec3& first_point)
    : policy_(checked_policy(std::move(policy), style)),
      episode_(checked_point(*policy_, first_point), policy_->workspace(),
               policy_->checkpoint().train.action_range) {}

StepOutput Session::start_output() const {
  td3::Episode first(episode_.content().front(), policy_->workspace(), policy_->checkpoint().train.action_range);
  return {0, first.generated().front(), td3::step_loss(policy_->loss_model(), first, false), false};
}

StepOutput Session::step(const Vec3& content_point) {
  if (closed_) throw StateError("session is closed");
  if (terminal()) throw StateError("session already produced 50 samples");
  episode_.push_content(checked_point(*policy_, content_point));
  const Vec3& g = episode_.advance(td3::policy_action(policy_->checkpoint().nets.actor, episode_.state()));
  const bool last = terminal();
  return {episode_.t(), g, td3::step_loss(policy_->loss_model(), episode_, last), last};
}

OfflineResult stylize_offline(const Trajectory& content, const std::string& style,
                              const std::shared_ptr<const StylePolicy>& policy) {
  OfflineResult out;
  for (const Trajectory& seg : trajectory::pad_or_split(content)) {
    Session s(policy, style, seg[0]);
    for (std::size_t i = 1; i < seg.size(); ++i) out.steps.push_back(s.step(seg[i]).loss);
    out.generated.samples.insert(out.generated.samples.end(), s.generated().begin(), s.generated().end());
    ++out.segments;
  }
  out.generated.sample_rate = trajectory::kCanonicalRate;
  return out;
}

EvaluationReport evaluate(const Tensor& generated_mm, const Tensor& content_mm, const Tensor& style_mm,
                          const lossnet::Autoencoder& ae, const styleloss::LossWeights& weights, double rt) {
  constexpr std::size_t n = trajectory::kSegmentLength;
  generated_mm.require_shape({n, 3}, "evaluate generated");
  content_mm.require_shape({n, 3}, "evaluate content");
  style_mm.require_shape({n, 3}, "evaluate style");
  return {styleloss::total_loss(ae, content_mm, style_mm, generated_mm, n, weights, rt, true),
          styleloss::total_loss(ae, content_mm, style_mm, content_mm, n, weights, rt, true)};
}

}  // namespace trajstyle::engine
