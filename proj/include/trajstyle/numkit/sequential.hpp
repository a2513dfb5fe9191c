#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajstyle/numkit/layer.hpp"

namespace trajstyle::numkit {

struct SequentialCache {
  std::vector<ForwardCache> layers;
};

// A chain of layers. Gradients are exchanged as a flat list aligned with
// parameters(): every layer's params in layer order.
class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  std::vector<Layer>& layers() noexcept { return layers_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  void push_back(Layer layer) { layers_.push_back(std::move(layer)); }

  Tensor forward(const Tensor& input, Mode mode, Rng* rng = nullptr,
                 SequentialCache* cache = nullptr) const;

  // Adds parameter gradients into `grads` and returns the input gradient
  // (empty when need_grad_in is false).
  Tensor backward(const SequentialCache& cache, const Tensor& grad_out, std::span<Tensor> grads,
                  bool need_grad_in = true) const;

  void update_running_stats(const SequentialCache& cache);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<Tensor> zero_grads() const;
  std::size_t parameter_count() const;

  // Visits every persistent tensor (parameters and batch-norm running
  // statistics) with a stable name "<prefix>/<index>/<role>".
  void for_each_tensor(const std::string& prefix,
                       const std::function<void(const std::string&, Tensor&)>& visit);
  void for_each_tensor(const std::string& prefix,
                       const std::function<void(const std::string&, const Tensor&)>& visit) const;

 private:
  std::vector<Layer> layers_;
};

}  // namespace trajstyle::numkit
