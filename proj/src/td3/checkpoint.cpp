#include "trajstyle/td3/checkpoint.hpp"

#include <cmath>
#include <vector>

namespace trajstyle::td3 {

using numkit::CheckpointError;
using numkit::TensorArchive;

namespace {

constexpr const char* kNetNames[] = {"actor", "critic1", "critic2", "actor_target", "critic1_target", "critic2_target"};

std::vector<BranchNet*> nets_of(Td3Nets& n) {
  return {&n.actor, &n.critic1, &n.critic2, &n.actor_target, &n.critic1_target, &n.critic2_target};
}
std::vector<const BranchNet*> nets_of(const Td3Nets& n) {
  return {&n.actor, &n.critic1, &n.critic2, &n.actor_target, &n.critic1_target, &n.critic2_target};
}

std::vector<double> sizes_to_doubles(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

std::size_t as_count(double v, const char* what) {
  if (!(v >= 0.0 && v < 1e12) || std::floor(v) != v)
    throw CheckpointError(CheckpointError::Kind::malformed, std::string("bad ") + what + " in policy checkpoint");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> counts(const Tensor& t, const char* what) {
  std::vector<std::size_t> out;
  for (double v : t.values()) out.push_back(as_count(v, what));
  return out;
}

const Tensor& rank1(const TensorArchive& a, const std::string& name) {
  const Tensor& t = a.get(name);
  if (t.rank() != 1)
    throw CheckpointError(CheckpointError::Kind::shape_mismatch, name + " should be rank 1");
  return t;
}

void put_adam(TensorArchive& a, const std::string& prefix, const numkit::AdamState& s) {
  a.put(prefix + "/step", numkit::scalar_tensor(static_cast<double>(s.step)));
  for (std::size_t i = 0; i < s.first_moment.size(); ++i) {
    a.put(prefix + "/m/" + std::to_string(i), s.first_moment[i]);
    a.put(prefix + "/v/" + std::to_string(i), s.second_moment[i]);
  }
}

void take_adam(const TensorArchive& a, const std::string& prefix, numkit::AdamState& s) {
  s.step = as_count(a.get(prefix + "/step", {1})[0], "adam step");
  for (std::size_t i = 0; i < s.first_moment.size(); ++i) {
    s.first_moment[i] = a.get(prefix + "/m/" + std::to_string(i), s.first_moment[i].shape());
    s.second_moment[i] = a.get(prefix + "/v/" + std::to_string(i), s.second_moment[i].shape());
  }
}

}  // namespace

void PolicyCheckpoint::write(TensorArchive& a) const {
  a.put("meta/kind", numkit::string_tensor("policy"));
  a.put("policy/style_id", numkit::string_tensor(style_id));
  a.put("policy/style", style_mm);

  a.put("policy/net/conv", numkit::vector_tensor(sizes_to_doubles(net.conv_channels)));
  a.put("policy/net/dense", numkit::vector_tensor(sizes_to_doubles(net.dense)));
  const double net_misc[] = {static_cast<double>(net.kernel), net.batch_norm ? 1.0 : 0.0};
  a.put("policy/net/misc", numkit::vector_tensor(net_misc));

  const double train_values[] = {static_cast<double>(train.episodes),
                                 static_cast<double>(train.batch),
                                 static_cast<double>(train.replay_capacity),
                                 static_cast<double>(train.horizon),
                                 train.critic_lr,
                                 train.actor_lr,
                                 train.gamma,
                                 train.tau,
                                 static_cast<double>(train.critic_actor_ratio),
                                 train.policy_noise_std,
                                 train.policy_noise_clip,
                                 train.action_noise_std,
                                 train.action_range,
                                 train.init_span,
                                 static_cast<double>(train.seed >> 32),
                                 static_cast<double>(train.seed & 0xffffffffULL)};
  a.put("policy/train", numkit::vector_tensor(train_values));

  const double w[] = {weights.content, weights.style, weights.position, weights.end_position, weights.velocity};
  a.put("policy/weights", numkit::vector_tensor(w));
  const double ws[] = {workspace.rt,    workspace.lo[0], workspace.lo[1], workspace.lo[2],
                       workspace.hi[0], workspace.hi[1], workspace.hi[2]};
  a.put("policy/workspace", numkit::vector_tensor(ws));

  const auto put = [&](const std::string& name, const Tensor& t) { a.put(name, t); };
  const auto all = nets_of(nets);
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->for_each_tensor(kNetNames[i], put);
  put_adam(a, "adam/actor", nets.actor_adam);
  put_adam(a, "adam/critic1", nets.critic1_adam);
  put_adam(a, "adam/critic2", nets.critic2_adam);
  const double counters[] = {static_cast<double>(nets.critic_updates), static_cast<double>(nets.actor_updates)};
  a.put("policy/counters", numkit::vector_tensor(counters));
}

PolicyCheckpoint PolicyCheckpoint::read(const TensorArchive& a) {
  if (!a.contains("meta/kind") || numkit::tensor_string(a.get("meta/kind")) != "policy")
    throw CheckpointError(CheckpointError::Kind::malformed, "not a policy checkpoint");
  PolicyCheckpoint c;
  c.style_id = numkit::tensor_string(a.get("policy/style_id"));
  c.style_mm = a.get("policy/style", {50, 3});

  c.net.conv_channels = counts(rank1(a, "policy/net/conv"), "conv channels");
  c.net.dense = counts(rank1(a, "policy/net/dense"), "dense widths");
  const Tensor& misc = a.get("policy/net/misc", {2});
  c.net.kernel = as_count(misc[0], "kernel");
  c.net.batch_norm = misc[1] != 0.0;

  const Tensor& t = a.get("policy/train", {16});
  c.train.episodes = as_count(t[0], "episodes");
  c.train.batch = as_count(t[1], "batch");
  c.train.replay_capacity = as_count(t[2], "replay capacity");
  c.train.horizon = as_count(t[3], "horizon");
  c.train.critic_lr = t[4];
  c.train.actor_lr = t[5];
  c.train.gamma = t[6];
  c.train.tau = t[7];
  c.train.critic_actor_ratio = as_count(t[8], "ratio");
  c.train.policy_noise_std = t[9];
  c.train.policy_noise_clip = t[10];
  c.train.action_noise_std = t[11];
  c.train.action_range = t[12];
  c.train.init_span = t[13];
  c.train.seed = (static_cast<std::uint64_t>(as_count(t[14], "seed")) << 32) |
                 static_cast<std::uint64_t>(as_count(t[15], "seed"));

  const Tensor& w = a.get("policy/weights", {5});
  c.weights = {w[0], w[1], w[2], w[3], w[4]};
  const Tensor& ws = a.get("policy/workspace", {7});
  c.workspace.rt = ws[0];
  c.workspace.lo = {ws[1], ws[2], ws[3]};
  c.workspace.hi = {ws[4], ws[5], ws[6]};

  try {
    c.net.validate();
    c.train.validate();
    c.weights.validate();
    c.workspace.validate();
  } catch (const Error& e) {
    throw CheckpointError(CheckpointError::Kind::malformed, std::string("policy checkpoint config: ") + e.what());
  }

  c.nets = Td3Nets(c.net);
  const auto take = [&](const std::string& name, Tensor& x) { x = a.get(name, x.shape()); };
  const auto all = nets_of(c.nets);
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->for_each_tensor(kNetNames[i], take);
  c.nets.actor_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(c.nets.actor.parameters()));
  c.nets.critic1_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(c.nets.critic1.parameters()));
  c.nets.critic2_adam = numkit::AdamState::for_parameters(std::span<Tensor* const>(c.nets.critic2.parameters()));
  take_adam(a, "adam/actor", c.nets.actor_adam);
  take_adam(a, "adam/critic1", c.nets.critic1_adam);
  take_adam(a, "adam/critic2", c.nets.critic2_adam);
  const Tensor& counters = a.get("policy/counters", {2});
  c.nets.critic_updates = as_count(counters[0], "critic updates");
  c.nets.actor_updates = as_count(counters[1], "actor updates");
  return c;
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path) {
  TensorArchive a;
  ckpt.write(a);
  a.save(path);
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return PolicyCheckpoint::read(TensorArchive::load(path));
}

}  // namespace trajstyle::td3
