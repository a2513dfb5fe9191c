#include "trajstyle/td3/agent.hpp"

#include <algorithm>
#include <cmath>

#include "trajstyle/error.hpp"

namespace trajstyle::td3 {

TrainConfig TrainConfig::for_rt(double rt) {
  if (!(rt > 0.0)) throw ValueError("rt must be positive");
  TrainConfig c;
  c.policy_noise_std = 0.002 * rt;
  c.policy_noise_clip = 0.005 * rt;
  c.action_noise_std = 0.02 * rt;
  c.action_range = 0.1 * rt;
  return c;
}

void TrainConfig::validate() const {
  if (batch == 0) throw ValueError("batch must be positive");
  if (replay_capacity < batch) throw ValueError("replay capacity must hold at least one batch");
  if (horizon == 0 || horizon > 49) throw ValueError("horizon must be in 1..49");
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0)) throw ValueError("learning rates must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValueError("gamma must be in (0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ValueError("tau must be in (0, 1]");
  if (critic_actor_ratio < 1) throw ValueError("critic/actor ratio must be at least 1");
  if (!(policy_noise_std >= 0.0) || !(policy_noise_clip >= 0.0) || !(action_noise_std >= 0.0))
    throw ValueError("noise levels must be non-negative");
  if (!(action_range > 0.0)) throw ValueError("action range must be positive");
  if (!(init_span > 0.0)) throw ValueError("init span must be positive");
}

Td3Nets::Td3Nets(const NetConfig& cfg)
    : actor(BranchNet::Role::actor, cfg),
      critic1(BranchNet::Role::critic, cfg),
      critic2(BranchNet::Role::critic, cfg) {
  actor_target = actor;
  critic1_target = critic1;
  critic2_target = critic2;
  actor_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(actor.parameters()));
  critic1_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(critic1.parameters()));
  critic2_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(critic2.parameters()));
}

void Td3Nets::initialize(Rng& rng, double init_span) {
  Rng r_actor = rng.split(), r_c1 = rng.split(), r_c2 = rng.split();
  actor.initialize(r_actor, init_span);
  critic1.initialize(r_c1, init_span);
  critic2.initialize(r_c2, init_span);
  actor_target = actor;
  critic1_target = critic1;
  critic2_target = critic2;
  actor_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(actor.parameters()));
  critic1_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(critic1.parameters()));
  critic2_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(critic2.parameters()));
  critic_updates = 0;
  actor_updates = 0;
}

Tensor Td3Nets::act(const StateBatch& state) const { return actor.forward(state, nullptr, Mode::infer); }

double td3_target(double reward, double done, double gamma, double q1, double q2) {
  return reward + gamma * std::min(q1, q2) * (1.0 - done);
}

namespace {

// Regress one critic to y; returns the MSE before the step.
double critic_step(BranchNet& critic, numkit::AdamState& adam, const TransitionBatch& batch,
                   const std::vector<double>& y, double lr) {
  const std::size_t b = batch.size();
  NetCache cache;
  const Tensor q = critic.forward(batch.state, &batch.action, Mode::train, &cache);
  Tensor grad({b, 1});
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double d = q[i] - y[i];
    loss += d * d;
    grad[i] = 2.0 * d / static_cast<double>(b);
  }
  std::vector<Tensor> grads = critic.zero_grads();
  critic.backward(cache, grad, grads);
  const std::vector<Tensor*> params = critic.parameters();
  numkit::adam_step(params, grads, adam, lr);
  critic.update_running_stats(cache);
  return loss / static_cast<double>(b);
}

}  // namespace

UpdateDiagnostics td3_update(Td3Nets& nets, const TransitionBatch& batch, const TrainConfig& cfg, Rng& rng) {
  const std::size_t b = batch.size();
  if (b == 0) throw ValueError("td3_update: empty batch");
  if (batch.done.size() != b || batch.action.shape() != numkit::Shape{b, kActionDims})
    throw ShapeError("td3_update: inconsistent batch");

  // Target policy smoothing in normalized action units.
  Tensor next_action = nets.actor_target.forward(batch.next_state, nullptr, Mode::infer);
  const double sigma = cfg.policy_noise_std / cfg.action_range;
  const double clip = cfg.policy_noise_clip / cfg.action_range;
  for (double& a : next_action.values()) {
    const double noise = sigma > 0.0 ? std::clamp(rng.normal(0.0, sigma), -clip, clip) : 0.0;
    a = std::clamp(a + noise, -1.0, 1.0);
  }
  const Tensor q1t = nets.critic1_target.forward(batch.next_state, &next_action, Mode::infer);
  const Tensor q2t = nets.critic2_target.forward(batch.next_state, &next_action, Mode::infer);

  UpdateDiagnostics diag;
  for (std::size_t i = 0; i < b; ++i) {
    diag.target_q1.push_back(q1t[i]);
    diag.target_q2.push_back(q2t[i]);
    diag.y.push_back(td3_target(batch.reward[i], batch.done[i], cfg.gamma, q1t[i], q2t[i]));
  }

  diag.critic1_loss = critic_step(nets.critic1, nets.critic1_adam, batch, diag.y, cfg.critic_lr);
  diag.critic2_loss = critic_step(nets.critic2, nets.critic2_adam, batch, diag.y, cfg.critic_lr);
  ++nets.critic_updates;

  if (nets.critic_updates % cfg.critic_actor_ratio == 0) {
    NetCache actor_cache, critic_cache;
    const Tensor a = nets.actor.forward(batch.state, nullptr, Mode::train, &actor_cache);
    const Tensor q = nets.critic1.forward(batch.state, &a, Mode::train, &critic_cache);
    double mean_q = 0.0;
    for (std::size_t i = 0; i < b; ++i) mean_q += q[i];
    diag.actor_q = mean_q / static_cast<double>(b);

    // Minimize -mean Q1.
    const Tensor grad_q({b, 1}, -1.0 / static_cast<double>(b));
    const Tensor grad_a = nets.critic1.action_gradient(critic_cache, grad_q);
    std::vector<Tensor> grads = nets.actor.zero_grads();
    nets.actor.backward(actor_cache, grad_a, grads);
    const std::vector<Tensor*> params = nets.actor.parameters();
    numkit::adam_step(params, grads, nets.actor_adam, cfg.actor_lr);
    nets.actor.update_running_stats(actor_cache);

    soft_update(nets.actor_target, nets.actor, cfg.tau);
    soft_update(nets.critic1_target, nets.critic1, cfg.tau);
    soft_update(nets.critic2_target, nets.critic2, cfg.tau);
    ++nets.actor_updates;
    diag.actor_updated = true;
  }
  return diag;
}

}  // namespace trajstyle::td3
