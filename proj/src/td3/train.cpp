#include "trajstyle/td3/train.hpp"

#include <algorithm>
#include <cmath>

#include "trajstyle/error.hpp"
#include "trajstyle/trajectory/generate.hpp"

namespace trajstyle::td3 {

using trajectory::kSegmentLength;

Episode::Episode(const Vec3& first_content, const trajectory::WorkspaceConfig& ws, double action_range)
    : ws_(ws), action_range_(action_range) {
  ws_.validate();
  if (!(action_range > 0.0)) throw ValueError("action range must be positive");
  if (!ws_.contains(first_content)) throw ValueError("first content point outside the workspace");
  content_.push_back(first_content);
  generated_.push_back(first_content);
}

void Episode::push_content(const Vec3& point) {
  if (full()) throw StateError("episode already holds 50 samples");
  if (content_.size() != generated_.size()) throw StateError("content point already pending");
  for (double v : point)
    if (!std::isfinite(v)) throw NonFiniteError("content point is not finite");
  content_.push_back(point);
}

State Episode::state() const {
  const Vec3& origin = content_.front();
  return State{trajectory::normalized_tensor(trajectory::pad_last(content_, kSegmentLength), origin, ws_.rt),
               trajectory::normalized_tensor(trajectory::pad_last(generated_, kSegmentLength), origin, ws_.rt),
               static_cast<double>(t()) / static_cast<double>(kSegmentLength)};
}

const Vec3& Episode::advance(const Action& a) {
  if (content_.size() != generated_.size() + 1) throw StateError("advance needs exactly one pending content point");
  Vec3 next = generated_.back();
  for (std::size_t k = 0; k < 3; ++k) {
    if (!(a[k] >= -1.0 && a[k] <= 1.0)) throw ValueError("action outside [-1, 1]");
    next[k] += a[k] * action_range_;
  }
  generated_.push_back(ws_.clamp(next));
  return generated_.back();
}

Tensor Episode::content_mm() const { return trajectory::to_tensor(trajectory::pad_last(content_, kSegmentLength)); }
Tensor Episode::generated_mm() const {
  return trajectory::to_tensor(trajectory::pad_last(generated_, kSegmentLength));
}

Action policy_action(const BranchNet& actor, const State& state) {
  const Tensor out = actor.forward(make_state_batch({&state}), nullptr, Mode::infer);
  return {out[0], out[1], out[2]};
}

styleloss::LossBreakdown step_loss(const styleloss::LossModel& model, const Episode& ep, bool terminal) {
  return model.evaluate(ep.content_mm(), ep.generated_mm(), ep.t() + 1, terminal);
}

std::vector<Vec3> greedy_rollout(const BranchNet& actor, const std::vector<Vec3>& content,
                                 const trajectory::WorkspaceConfig& ws, double action_range, std::size_t horizon) {
  if (content.size() < horizon + 1) throw ValueError("content shorter than the rollout horizon");
  Episode ep(content[0], ws, action_range);
  for (std::size_t k = 0; k < horizon; ++k) {
    ep.push_content(content[k + 1]);
    ep.advance(policy_action(actor, ep.state()));
  }
  return ep.generated();
}

PolicyTrainResult train_policy(const std::string& style_id, const Tensor& style_mm, const lossnet::Autoencoder& ae,
                               const styleloss::LossWeights& weights, const TrainConfig& cfg, const NetConfig& net,
                               const trajectory::WorkspaceConfig& ws, ContentSource content_source,
                               EpisodeCallback on_episode) {
  cfg.validate();
  net.validate();
  weights.validate();
  ws.validate();
  if (!ae.trained()) throw StateError("train_policy needs a trained autoencoder");
  style_mm.require_shape({kSegmentLength, 3}, "style exemplar");
  style_mm.require_finite("style exemplar");
  if (style_id.empty()) throw ValueError("style id must not be empty");
  if (!content_source) {
    content_source = [ws](Rng& rng) { return trajectory::random_linear_content(rng, ws).samples; };
  }

  Rng root(cfg.seed);
  Rng init_rng = root.split(), content_rng = root.split(), explore_rng = root.split(), sample_rng = root.split(),
      smooth_rng = root.split();

  PolicyTrainResult result;
  PolicyCheckpoint& ck = result.checkpoint;
  ck.style_id = style_id;
  ck.style_mm = style_mm;
  ck.net = net;
  ck.train = cfg;
  ck.weights = weights;
  ck.workspace = ws;
  ck.nets = Td3Nets(net);
  ck.nets.initialize(init_rng, cfg.init_span);

  const styleloss::LossModel model(ae, style_mm, weights, ws.rt, true);
  ReplayBuffer replay(cfg.replay_capacity);
  const double explore_sigma = cfg.action_noise_std / cfg.action_range;

  for (std::size_t episode = 0; episode < cfg.episodes; ++episode) {
    const std::vector<Vec3> content = content_source(content_rng);
    if (content.size() < cfg.horizon + 1) throw ValueError("content source returned too few samples");
    Episode ep(content[0], ws, cfg.action_range);
    ep.push_content(content[1]);
    State s = ep.state();
    double episode_reward = 0.0;
    for (std::size_t k = 0; k < cfg.horizon; ++k) {
      Action a = policy_action(ck.nets.actor, s);
      for (double& v : a) {
        const double noise = explore_sigma > 0.0 ? explore_rng.normal(0.0, explore_sigma) : 0.0;
        v = std::clamp(v + noise, -1.0, 1.0);
      }
      ep.advance(a);
      const bool terminal = k + 1 == cfg.horizon;
      const styleloss::LossBreakdown loss = step_loss(model, ep, terminal);
      if (!terminal) ep.push_content(content[k + 2]);
      State next = ep.state();
      replay.push(Transition{std::move(s), a, loss.reward, next, terminal});
      episode_reward += loss.reward;
      s = std::move(next);

      if (replay.size() >= cfg.batch)
        td3_update(ck.nets, make_batch(replay.sample(cfg.batch, sample_rng)), cfg, smooth_rng);
    }
    result.episode_rewards.push_back(episode_reward);
    if (on_episode) on_episode(episode, episode_reward, ck.nets);
  }
  return result;
}

}  // namespace trajstyle::td3
