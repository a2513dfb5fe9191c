#include "trajstyle/td3/networks.hpp"

#include "trajstyle/error.hpp"

namespace trajstyle::td3 {

using numkit::LayerKind;
using numkit::Sequential;

namespace {

constexpr std::size_t kSteps = 50;

void push_block(Sequential& s, numkit::Layer layer, std::size_t width, bool batch_norm) {
  s.push_back(std::move(layer));
  if (batch_norm) s.push_back(numkit::make_batch_norm(width));
  s.push_back(numkit::make_simple(LayerKind::relu));
}

Sequential make_branch(const NetConfig& cfg) {
  Sequential s;
  std::size_t in = 3;
  for (std::size_t ch : cfg.conv_channels) {
    push_block(s, numkit::make_conv1d(in, ch, cfg.kernel), ch, cfg.batch_norm);
    in = ch;
  }
  s.push_back(numkit::make_simple(LayerKind::flatten));
  return s;
}

std::size_t count_params(const Sequential& s) { return s.parameters().size(); }

}  // namespace

void NetConfig::validate() const {
  if (conv_channels.empty()) throw ValueError("network needs at least one conv layer");
  if (dense.size() < 3) throw ValueError("network needs at least three dense widths");
  if (kernel == 0 || kernel % 2 == 0) throw ValueError("conv kernel must be odd");
  for (std::size_t c : conv_channels)
    if (c == 0) throw ValueError("conv channels must be positive");
  for (std::size_t d : dense)
    if (d == 0) throw ValueError("dense widths must be positive");
}

BranchNet::BranchNet(Role role, const NetConfig& cfg) : role_(role), cfg_(cfg) {
  cfg_.validate();
  content_ = make_branch(cfg_);
  generated_ = make_branch(cfg_);
  std::size_t in = 2 * kSteps * cfg_.conv_channels.back() + 1;
  const bool bn = cfg_.batch_norm;
  if (role_ == Role::actor) {
    for (std::size_t d : cfg_.dense) {
      push_block(head_, numkit::make_dense(in, d), d, bn);
      in = d;
    }
    head_.push_back(numkit::make_dense(in, kActionDims));
    head_.push_back(numkit::make_simple(LayerKind::tanh));
  } else {
    push_block(pre_, numkit::make_dense(in, cfg_.dense[0]), cfg_.dense[0], bn);
    in = cfg_.dense[0] + kActionDims;
    std::vector<std::size_t> widths{cfg_.dense[1], cfg_.dense[1]};
    widths.insert(widths.end(), cfg_.dense.begin() + 2, cfg_.dense.end());
    for (std::size_t d : widths) {
      push_block(head_, numkit::make_dense(in, d), d, bn);
      in = d;
    }
    head_.push_back(numkit::make_dense(in, 1));
  }
}

std::vector<Sequential*> BranchNet::parts() { return {&content_, &generated_, &pre_, &head_}; }
std::vector<const Sequential*> BranchNet::parts() const { return {&content_, &generated_, &pre_, &head_}; }

void BranchNet::initialize(Rng& rng, double final_span) {
  for (Sequential* s : parts())
    for (numkit::Layer& layer : s->layers())
      if (layer.kind == LayerKind::conv1d || layer.kind == LayerKind::dense) numkit::init_fan_in(layer, rng);
  for (auto it = head_.layers().rbegin(); it != head_.layers().rend(); ++it) {
    if (it->kind == LayerKind::dense) {
      numkit::init_uniform(*it, final_span, rng);
      break;
    }
  }
}

Tensor BranchNet::forward(const StateBatch& state, const Tensor* action, Mode mode, NetCache* cache) const {
  const std::size_t b = state.size();
  state.content.require_shape({b, kSteps, 3}, "state content");
  state.generated.require_shape({b, kSteps, 3}, "state generated");
  state.progress.require_shape({b, 1}, "state progress");
  const Tensor fc = content_.forward(state.content, mode, nullptr, cache ? &cache->content : nullptr);
  const Tensor fg = generated_.forward(state.generated, mode, nullptr, cache ? &cache->generated : nullptr);
  Tensor x = numkit::concat_features({&fc, &fg, &state.progress});
  if (role_ == Role::critic) {
    if (!action) throw ValueError("critic forward needs an action");
    action->require_shape({b, kActionDims}, "critic action");
    action->require_finite("critic action");
    const Tensor h = pre_.forward(x, mode, nullptr, cache ? &cache->pre : nullptr);
    x = numkit::concat_features({&h, action});
  }
  return head_.forward(x, mode, nullptr, cache ? &cache->head : nullptr);
}

Tensor BranchNet::backward(const NetCache& cache, const Tensor& grad_out, std::span<Tensor> grads,
                           bool need_action_grad) const {
  const std::size_t nc = count_params(content_), ng = count_params(generated_), np = count_params(pre_),
                    nh = count_params(head_);
  if (grads.size() != nc + ng + np + nh) throw ShapeError("BranchNet::backward: gradient list size mismatch");
  Tensor gx = head_.backward(cache.head, grad_out, grads.subspan(nc + ng + np, nh), true);
  Tensor action_grad;
  if (role_ == Role::critic) {
    auto split = numkit::split_features(gx, {cfg_.dense[0], kActionDims});
    action_grad = std::move(split[1]);
    gx = pre_.backward(cache.pre, split[0], grads.subspan(nc + ng, np), true);
  }
  const std::size_t flat = kSteps * cfg_.conv_channels.back();
  auto split = numkit::split_features(gx, {flat, flat, 1});
  content_.backward(cache.content, split[0], grads.subspan(0, nc), false);
  generated_.backward(cache.generated, split[1], grads.subspan(nc, ng), false);
  if (need_action_grad && role_ == Role::critic) return action_grad;
  return Tensor();
}

Tensor BranchNet::action_gradient(const NetCache& cache, const Tensor& grad_out) const {
  if (role_ != Role::critic) throw StateError("action_gradient is only defined for critics");
  std::vector<Tensor> scratch = head_.zero_grads();
  const Tensor gx = head_.backward(cache.head, grad_out, scratch, true);
  return numkit::split_features(gx, {cfg_.dense[0], kActionDims})[1];
}

void BranchNet::update_running_stats(const NetCache& cache) {
  content_.update_running_stats(cache.content);
  generated_.update_running_stats(cache.generated);
  if (role_ == Role::critic) pre_.update_running_stats(cache.pre);
  head_.update_running_stats(cache.head);
}

std::vector<Tensor*> BranchNet::parameters() {
  std::vector<Tensor*> out;
  for (Sequential* s : parts())
    for (Tensor* p : s->parameters()) out.push_back(p);
  return out;
}

std::vector<const Tensor*> BranchNet::parameters() const {
  std::vector<const Tensor*> out;
  for (const Sequential* s : parts())
    for (const Tensor* p : s->parameters()) out.push_back(p);
  return out;
}

std::vector<Tensor> BranchNet::zero_grads() const {
  std::vector<Tensor> out;
  for (const Tensor* p : parameters()) out.emplace_back(p->shape());
  return out;
}

void BranchNet::for_each_tensor(const std::string& prefix,
                                const std::function<void(const std::string&, Tensor&)>& visit) {
  content_.for_each_tensor(prefix + "/content", visit);
  generated_.for_each_tensor(prefix + "/generated", visit);
  pre_.for_each_tensor(prefix + "/pre", visit);
  head_.for_each_tensor(prefix + "/head", visit);
}

void BranchNet::for_each_tensor(const std::string& prefix,
                                const std::function<void(const std::string&, const Tensor&)>& visit) const {
  content_.for_each_tensor(prefix + "/content", visit);
  generated_.for_each_tensor(prefix + "/generated", visit);
  pre_.for_each_tensor(prefix + "/pre", visit);
  head_.for_each_tensor(prefix + "/head", visit);
}

void soft_update(BranchNet& target, const BranchNet& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValueError("tau must be in (0, 1]");
  std::vector<const Tensor*> src;
  online.for_each_tensor("", [&](const std::string&, const Tensor& t) { src.push_back(&t); });
  std::size_t i = 0;
  target.for_each_tensor("", [&](const std::string& name, Tensor& t) {
    if (i >= src.size() || src[i]->shape() != t.shape()) throw ShapeError("soft_update: networks differ at " + name);
    const Tensor& o = *src[i++];
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = tau * o[k] + (1.0 - tau) * t[k];
  });
  if (i != src.size()) throw ShapeError("soft_update: networks differ in size");
}

}  // namespace trajstyle::td3
