#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "trajstyle/numkit/rng.hpp"
#include "trajstyle/numkit/tensor.hpp"

namespace trajstyle::numkit {

enum class LayerKind : std::uint8_t {
  conv1d,
  transpose_conv1d,
  avg_pool1d,
  upsample1d,
  dense,
  batch_norm,
  relu,
  tanh,
  dropout,
  flatten,
};

std::string_view kind_name(LayerKind kind);

enum class Mode { train, infer };

inline constexpr double kDefaultDropoutRate = 0.25;
inline constexpr double kBatchNormMomentum = 0.99;
inline constexpr double kBatchNormEpsilon = 1e-5;

// A layer is plain data: kind, hyperparameters, parameters and (for batch
// norm) running statistics. Shapes:
//   conv1d            in [B,T,Cin] -> [B,T,Cout], weight [K,Cin,Cout], bias [Cout]
//   transpose_conv1d  in [B,T,Cin] -> [B,T,Cout], weight [K,Cout,Cin], bias [Cout]
//   avg_pool1d        [B,T,C] -> [B,T/2,C] (T even, width 2 stride 2)
//   upsample1d        [B,T,C] -> [B,2T,C] (nearest repeat)
//   dense             [B,in] -> [B,out], weight [in,out], bias [out]
//   batch_norm        [B,C] or [B,T,C], statistics over every axis but the last
//   flatten           [B,T,C] -> [B,T*C]
// Convolutions use zero same-padding with an odd kernel.
struct Layer {
  LayerKind kind = LayerKind::relu;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  double dropout_rate = kDefaultDropoutRate;
  double bn_momentum = kBatchNormMomentum;
  double bn_epsilon = kBatchNormEpsilon;

  std::vector<Tensor> params;  // {weight, bias} or {gamma, beta}
  Tensor running_mean;
  Tensor running_var;

  bool has_params() const noexcept { return !params.empty(); }
};

Layer make_conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
Layer make_transpose_conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
Layer make_dense(std::size_t in_features, std::size_t out_features);
Layer make_batch_norm(std::size_t channels);
Layer make_dropout(double rate = kDefaultDropoutRate);
Layer make_simple(LayerKind kind);  // avg_pool1d, upsample1d, relu, tanh, flatten

// Weight and bias drawn from Uniform(-bound, bound).
void init_uniform(Layer& layer, double bound, Rng& rng);
// Uniform(+-1/sqrt(fan_in)) where fan_in is the weight's reduction size.
void init_fan_in(Layer& layer, Rng& rng);

// Checks parameter shapes against the declared channel counts and that batch
// norm running variance is positive. Throws ShapeError / ValueError.
void validate(const Layer& layer);

// State kept by a forward pass for the matching backward pass.
struct ForwardCache {
  bool valid = false;
  LayerKind kind = LayerKind::relu;
  Mode mode = Mode::infer;
  Shape input_shape;
  Shape output_shape;
  Tensor aux;     // im2col columns, dense input, mask, normalized input or output
  std::vector<double> batch_mean;
  std::vector<double> inv_std;
};

// rng is required for dropout in train mode. cache may be null when no
// backward pass follows.
Tensor layer_forward(const Layer& layer, const Tensor& input, Mode mode, Rng* rng = nullptr,
                     ForwardCache* cache = nullptr);

struct LayerGrads {
  Tensor grad_in;               // empty when not requested
  std::vector<Tensor> params;   // aligned with layer.params
};

LayerGrads layer_backward(const Layer& layer, const ForwardCache& cache, const Tensor& grad_out,
                          bool need_grad_in = true);

// Blends the batch statistics of a train-mode batch-norm forward pass into the
// running statistics. No-op for every other kind.
void update_running_stats(Layer& layer, const ForwardCache& cache);

}  // namespace trajstyle::numkit
