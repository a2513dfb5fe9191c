#include "trajstyle/numkit/sequential.hpp"

#include "trajstyle/error.hpp"
#include "trajstyle/numkit/kernels.hpp"

namespace trajstyle::numkit {

Tensor Sequential::forward(const Tensor& input, Mode mode, Rng* rng, SequentialCache* cache) const {
  if (cache) cache->layers.assign(layers_.size(), ForwardCache{});
  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layer_forward(layers_[i], x, mode, rng, cache ? &cache->layers[i] : nullptr);
  }
  return x;
}

Tensor Sequential::backward(const SequentialCache& cache, const Tensor& grad_out,
                            std::span<Tensor> grads, bool need_grad_in) const {
  if (cache.layers.size() != layers_.size()) throw CacheError("sequential: cache size mismatch");
  std::size_t offset = 0;
  std::vector<std::size_t> offsets(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    offsets[i] = offset;
    offset += layers_[i].params.size();
  }
  if (grads.size() != offset) throw ShapeError("sequential: gradient list size mismatch");

  const auto& kt = kernels::active();
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const bool want_in = need_grad_in || i > 0;
    LayerGrads lg = layer_backward(layers_[i], cache.layers[i], g, want_in);
    for (std::size_t p = 0; p < lg.params.size(); ++p) {
      Tensor& acc = grads[offsets[i] + p];
      acc.require_shape(lg.params[p].shape(), "sequential gradient");
      kt.axpy(1.0, lg.params[p].data(), acc.data(), acc.size());
    }
    g = std::move(lg.grad_in);
  }
  return g;
}

void Sequential::update_running_stats(const SequentialCache& cache) {
  if (cache.layers.size() != layers_.size()) throw CacheError("sequential: cache size mismatch");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    numkit::update_running_stats(layers_[i], cache.layers[i]);
  }
}

std::vector<Tensor*> Sequential::parameters() {
  std::vector<Tensor*> out;
  for (Layer& layer : layers_)
    for (Tensor& p : layer.params) out.push_back(&p);
  return out;
}

std::vector<const Tensor*> Sequential::parameters() const {
  std::vector<const Tensor*> out;
  for (const Layer& layer : layers_)
    for (const Tensor& p : layer.params) out.push_back(&p);
  return out;
}

std::vector<Tensor> Sequential::zero_grads() const {
  std::vector<Tensor> out;
  for (const Tensor* p : parameters()) out.push_back(Tensor::zeros_like(*p));
  return out;
}

std::size_t Sequential::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* p : parameters()) n += p->size();
  return n;
}

namespace {

template <typename LayerRange, typename Visit>
void visit_tensors(LayerRange& layers, const std::string& prefix, Visit&& visit) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& layer = layers[i];
    const std::string base = prefix + "/" + std::to_string(i) + "/";
    const bool bn = layer.kind == LayerKind::batch_norm;
    if (!layer.params.empty()) {
      visit(base + (bn ? "gamma" : "weight"), layer.params[0]);
      visit(base + (bn ? "beta" : "bias"), layer.params[1]);
    }
    if (bn) {
      visit(base + "running_mean", layer.running_mean);
      visit(base + "running_var", layer.running_var);
    }
  }
}

}  // namespace

void Sequential::for_each_tensor(const std::string& prefix,
                                 const std::function<void(const std::string&, Tensor&)>& visit) {
  visit_tensors(layers_, prefix, visit);
}

void Sequential::for_each_tensor(
    const std::string& prefix,
    const std::function<void(const std::string&, const Tensor&)>& visit) const {
  visit_tensors(layers_, prefix, visit);
}

}  // namespace trajstyle::numkit
