#include "trajstyle/numkit/layer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "trajstyle/error.hpp"
#include "trajstyle/numkit/kernels.hpp"

namespace trajstyle::numkit {

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::transpose_conv1d: return "transpose_conv1d";
    case LayerKind::avg_pool1d: return "avg_pool1d";
    case LayerKind::upsample1d: return "upsample1d";
    case LayerKind::dense: return "dense";
    case LayerKind::batch_norm: return "batch_norm";
    case LayerKind::relu: return "relu";
    case LayerKind::tanh: return "tanh";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

namespace {

std::string label(const Layer& layer) { return std::string(kind_name(layer.kind)); }

void require_odd_kernel(std::size_t kernel) {
  if (kernel == 0 || kernel % 2 == 0) {
    throw ValueError("convolution kernel must be odd for same padding, got " +
                     std::to_string(kernel));
  }
}

// ---- convolution via im2col -------------------------------------------------

// cols[(b,t), k*C + c] = x[b, t + k - pad, c], zero outside [0, T).
Tensor im2col(const Tensor& x, std::size_t kernel) {
  const std::size_t batch = x.dim(0), steps = x.dim(1), channels = x.dim(2);
  const std::size_t pad = (kernel - 1) / 2;
  const std::size_t width = kernel * channels;
  Tensor cols({batch * steps, width});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      double* row = cols.data() + (b * steps + t) * width;
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
        std::memcpy(row + k * channels, x.data() + (b * steps + src) * channels,
                    channels * sizeof(double));
      }
    }
  }
  return cols;
}

Tensor col2im(const Tensor& cols, std::size_t batch, std::size_t steps, std::size_t channels,
              std::size_t kernel) {
  const std::size_t pad = (kernel - 1) / 2;
  const std::size_t width = kernel * channels;
  Tensor x({batch, steps, channels});
  const auto& kt = kernels::active();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const double* row = cols.data() + (b * steps + t) * width;
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t dst = static_cast<std::ptrdiff_t>(t + k) - static_cast<std::ptrdiff_t>(pad);
        if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(steps)) continue;
        kt.axpy(1.0, row + k * channels, x.data() + (b * steps + dst) * channels, channels);
      }
    }
  }
  return x;
}

// A stride-1 transposed convolution with same padding equals a convolution
// whose kernel is flipped in time with input/output channels swapped:
// conv_weight[k, ci, co] = tconv_weight[K-1-k, co, ci].
Tensor tconv_to_conv_weight(const Tensor& w) {
  const std::size_t kernel = w.dim(0), cout = w.dim(1), cin = w.dim(2);
  Tensor out({kernel, cin, cout});
  for (std::size_t k = 0; k < kernel; ++k)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t ci = 0; ci < cin; ++ci) out.at(k, ci, co) = w.at(kernel - 1 - k, co, ci);
  return out;
}

Tensor conv_to_tconv_weight(const Tensor& w) {
  const std::size_t kernel = w.dim(0), cin = w.dim(1), cout = w.dim(2);
  Tensor out({kernel, cout, cin});
  for (std::size_t k = 0; k < kernel; ++k)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t co = 0; co < cout; ++co) out.at(kernel - 1 - k, co, ci) = w.at(k, ci, co);
  return out;
}

Tensor conv_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t kernel,
                    ForwardCache* cache) {
  const std::size_t batch = x.dim(0), steps = x.dim(1), cin = x.dim(2);
  const std::size_t cout = bias.size();
  Tensor cols = im2col(x, kernel);
  Tensor out({batch, steps, cout});
  for (std::size_t r = 0; r < batch * steps; ++r) {
    std::memcpy(out.data() + r * cout, bias.data(), cout * sizeof(double));
  }
  kernels::active().gemm(false, false, batch * steps, cout, kernel * cin, cols.data(),
                         weight.data(), out.data());
  if (cache) cache->aux = std::move(cols);
  return out;
}

// Returns {grad_in (maybe empty), grad_weight [K,Cin,Cout], grad_bias}.
std::vector<Tensor> conv_backward(const ForwardCache& cache, const Tensor& weight,
                                  const Tensor& grad_out, bool need_grad_in) {
  const std::size_t batch = cache.input_shape[0], steps = cache.input_shape[1];
  const std::size_t cin = cache.input_shape[2];
  const std::size_t kernel = weight.dim(0);
  const std::size_t cout = weight.dim(2);
  const auto& kt = kernels::active();
  const std::size_t rows = batch * steps;

  Tensor grad_w(weight.shape());
  kt.gemm(true, false, kernel * cin, cout, rows, cache.aux.data(), grad_out.data(), grad_w.data());
  Tensor grad_b({cout});
  for (std::size_t r = 0; r < rows; ++r) kt.axpy(1.0, grad_out.data() + r * cout, grad_b.data(), cout);

  Tensor grad_in;
  if (need_grad_in) {
    Tensor grad_cols({rows, kernel * cin});
    kt.gemm(false, true, rows, kernel * cin, cout, grad_out.data(), weight.data(), grad_cols.data());
    grad_in = col2im(grad_cols, batch, steps, cin, kernel);
  }
  return {std::move(grad_in), std::move(grad_w), std::move(grad_b)};
}

// ---- batch norm ------------------------------------------------------------

Tensor batch_norm_forward(const Layer& layer, const Tensor& x, Mode mode, ForwardCache* cache) {
  const std::size_t channels = layer.out_channels;
  const std::size_t rows = x.size() / channels;
  const Tensor& gamma = layer.params[0];
  const Tensor& beta = layer.params[1];
  std::vector<double> mean(channels, 0.0), inv_std(channels, 0.0);
  if (mode == Mode::train) {
    if (rows < 2) throw ShapeError("batch_norm: train mode needs at least 2 rows per channel");
    std::vector<double> var(channels, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < channels; ++c) mean[c] += x[r * channels + c];
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double d = x[r * channels + c] - mean[c];
        var[c] += d * d;
      }
    }
    for (std::size_t c = 0; c < channels; ++c) {
      var[c] /= static_cast<double>(rows);
      inv_std[c] = 1.0 / std::sqrt(var[c] + layer.bn_epsilon);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = layer.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(layer.running_var[c] + layer.bn_epsilon);
    }
  }
  Tensor xhat(x.shape());
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      xhat[i] = (x[i] - mean[c]) * inv_std[c];
      out[i] = gamma[c] * xhat[i] + beta[c];
    }
  }
  if (cache) {
    cache->aux = std::move(xhat);
    cache->batch_mean = std::move(mean);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

std::vector<Tensor> batch_norm_backward(const Layer& layer, const ForwardCache& cache,
                                        const Tensor& grad_out) {
  const std::size_t channels = layer.out_channels;
  const std::size_t rows = grad_out.size() / channels;
  const Tensor& gamma = layer.params[0];
  const Tensor& xhat = cache.aux;
  Tensor grad_gamma({channels}), grad_beta({channels});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      grad_gamma[c] += grad_out[i] * xhat[i];
      grad_beta[c] += grad_out[i];
    }
  }
  Tensor grad_in(cache.input_shape);
  if (cache.mode == Mode::train) {
    // dx = inv_std / N * (N * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat)),
    // with dxhat = dy * gamma, so the sums are gamma * grad_beta / grad_gamma.
    const double n = static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t i = r * channels + c;
        grad_in[i] = gamma[c] * cache.inv_std[c] / n *
                     (n * grad_out[i] - grad_beta[c] - xhat[i] * grad_gamma[c]);
      }
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t i = r * channels + c;
        grad_in[i] = grad_out[i] * gamma[c] * cache.inv_std[c];
      }
    }
  }
  return {std::move(grad_in), std::move(grad_gamma), std::move(grad_beta)};
}

void check_input(const Layer& layer, const Tensor& x) {
  const auto fail = [&](const std::string& msg) {
    throw ShapeError(label(layer) + ": " + msg + ", got " + to_string(x.shape()));
  };
  switch (layer.kind) {
    case LayerKind::conv1d:
    case LayerKind::transpose_conv1d:
      if (x.rank() != 3 || x.dim(2) != layer.in_channels)
        fail("expected [B,T," + std::to_string(layer.in_channels) + "]");
      break;
    case LayerKind::avg_pool1d:
      if (x.rank() != 3 || x.dim(1) % 2 != 0) fail("expected [B,T,C] with even T");
      break;
    case LayerKind::upsample1d:
    case LayerKind::flatten:
      if (x.rank() != 3) fail("expected [B,T,C]");
      break;
    case LayerKind::dense:
      if (x.rank() != 2 || x.dim(1) != layer.in_channels)
        fail("expected [B," + std::to_string(layer.in_channels) + "]");
      break;
    case LayerKind::batch_norm:
      if (x.rank() < 2 || x.shape().back() != layer.out_channels)
        fail("expected trailing dimension " + std::to_string(layer.out_channels));
      break;
    case LayerKind::relu:
    case LayerKind::tanh:
    case LayerKind::dropout:
      break;
  }
}

}  // namespace

// ---- construction ----------------------------------------------------------

Layer make_conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
  require_odd_kernel(kernel);
  Layer layer;
  layer.kind = LayerKind::conv1d;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.kernel = kernel;
  layer.params = {Tensor({kernel, in_channels, out_channels}), Tensor({out_channels})};
  return layer;
}

Layer make_transpose_conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
  require_odd_kernel(kernel);
  Layer layer;
  layer.kind = LayerKind::transpose_conv1d;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.kernel = kernel;
  layer.params = {Tensor({kernel, out_channels, in_channels}), Tensor({out_channels})};
  return layer;
}

Layer make_dense(std::size_t in_features, std::size_t out_features) {
  Layer layer;
  layer.kind = LayerKind::dense;
  layer.in_channels = in_features;
  layer.out_channels = out_features;
  layer.params = {Tensor({in_features, out_features}), Tensor({out_features})};
  return layer;
}

Layer make_batch_norm(std::size_t channels) {
  Layer layer;
  layer.kind = LayerKind::batch_norm;
  layer.in_channels = channels;
  layer.out_channels = channels;
  layer.params = {Tensor({channels}, 1.0), Tensor({channels}, 0.0)};
  layer.running_mean = Tensor({channels}, 0.0);
  layer.running_var = Tensor({channels}, 1.0);
  return layer;
}

Layer make_dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValueError("dropout rate must be in [0, 1)");
  Layer layer;
  layer.kind = LayerKind::dropout;
  layer.dropout_rate = rate;
  return layer;
}

Layer make_simple(LayerKind kind) {
  switch (kind) {
    case LayerKind::avg_pool1d:
    case LayerKind::upsample1d:
    case LayerKind::relu:
    case LayerKind::tanh:
    case LayerKind::flatten: {
      Layer layer;
      layer.kind = kind;
      return layer;
    }
    default:
      throw ValueError("make_simple: " + std::string(kind_name(kind)) + " needs a dedicated factory");
  }
}

void init_uniform(Layer& layer, double bound, Rng& rng) {
  if (layer.kind == LayerKind::batch_norm) return;
  for (Tensor& p : layer.params)
    for (double& v : p.values()) v = rng.uniform(-bound, bound);
}

void init_fan_in(Layer& layer, Rng& rng) {
  std::size_t fan_in = 0;
  switch (layer.kind) {
    case LayerKind::conv1d:
    case LayerKind::transpose_conv1d:
      fan_in = layer.kernel * layer.in_channels;
      break;
    case LayerKind::dense:
      fan_in = layer.in_channels;
      break;
    default:
      return;
  }
  init_uniform(layer, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

void validate(const Layer& layer) {
  auto expect = [&](std::size_t index, const Shape& shape) {
    if (index >= layer.params.size())
      throw ShapeError(label(layer) + ": missing parameter " + std::to_string(index));
    layer.params[index].require_shape(shape, "layer parameter");
  };
  switch (layer.kind) {
    case LayerKind::conv1d:
      expect(0, {layer.kernel, layer.in_channels, layer.out_channels});
      expect(1, {layer.out_channels});
      break;
    case LayerKind::transpose_conv1d:
      expect(0, {layer.kernel, layer.out_channels, layer.in_channels});
      expect(1, {layer.out_channels});
      break;
    case LayerKind::dense:
      expect(0, {layer.in_channels, layer.out_channels});
      expect(1, {layer.out_channels});
      break;
    case LayerKind::batch_norm:
      expect(0, {layer.out_channels});
      expect(1, {layer.out_channels});
      layer.running_mean.require_shape({layer.out_channels}, "batch_norm running mean");
      layer.running_var.require_shape({layer.out_channels}, "batch_norm running variance");
      for (double v : layer.running_var.values()) {
        if (!(v > 0.0)) throw ValueError("batch_norm running variance must be > 0");
      }
      break;
    default:
      if (!layer.params.empty()) throw ShapeError(label(layer) + ": unexpected parameters");
      break;
  }
}

// ---- forward ---------------------------------------------------------------

Tensor layer_forward(const Layer& layer, const Tensor& input, Mode mode, Rng* rng,
                     ForwardCache* cache) {
  check_input(layer, input);
  input.require_finite(std::string(kind_name(layer.kind)).c_str());
  if (cache) {
    *cache = ForwardCache{};
    cache->kind = layer.kind;
    cache->mode = mode;
    cache->input_shape = input.shape();
  }

  Tensor out;
  switch (layer.kind) {
    case LayerKind::conv1d:
      out = conv_forward(input, layer.params[0], layer.params[1], layer.kernel, cache);
      break;
    case LayerKind::transpose_conv1d:
      out = conv_forward(input, tconv_to_conv_weight(layer.params[0]), layer.params[1],
                         layer.kernel, cache);
      break;
    case LayerKind::avg_pool1d: {
      const std::size_t batch = input.dim(0), steps = input.dim(1), channels = input.dim(2);
      out = Tensor({batch, steps / 2, channels});
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < steps / 2; ++t)
          for (std::size_t c = 0; c < channels; ++c)
            out.at(b, t, c) = 0.5 * (input.at(b, 2 * t, c) + input.at(b, 2 * t + 1, c));
      break;
    }
    case LayerKind::upsample1d: {
      const std::size_t batch = input.dim(0), steps = input.dim(1), channels = input.dim(2);
      out = Tensor({batch, 2 * steps, channels});
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < 2 * steps; ++t)
          std::memcpy(out.data() + (b * 2 * steps + t) * channels,
                      input.data() + (b * steps + t / 2) * channels, channels * sizeof(double));
      break;
    }
    case LayerKind::dense: {
      const std::size_t batch = input.dim(0);
      const std::size_t n_out = layer.out_channels;
      out = Tensor({batch, n_out});
      for (std::size_t b = 0; b < batch; ++b)
        std::memcpy(out.data() + b * n_out, layer.params[1].data(), n_out * sizeof(double));
      kernels::active().gemm(false, false, batch, n_out, layer.in_channels, input.data(),
                             layer.params[0].data(), out.data());
      if (cache) cache->aux = input;
      break;
    }
    case LayerKind::batch_norm:
      out = batch_norm_forward(layer, input, mode, cache);
      break;
    case LayerKind::relu:
      out = input;
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      if (cache) cache->aux = out;
      break;
    case LayerKind::tanh:
      out = input;
      for (double& v : out.values()) v = std::tanh(v);
      if (cache) cache->aux = out;
      break;
    case LayerKind::dropout:
      out = input;
      if (mode == Mode::train && layer.dropout_rate > 0.0) {
        if (!rng) throw ValueError("dropout: train mode requires an rng");
        Tensor mask(input.shape());
        const double keep_scale = 1.0 / (1.0 - layer.dropout_rate);
        for (double& m : mask.values()) m = rng->uniform() >= layer.dropout_rate ? keep_scale : 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
        if (cache) cache->aux = std::move(mask);
      }
      break;
    case LayerKind::flatten:
      out = input.reshaped({input.dim(0), input.dim(1) * input.dim(2)});
      break;
  }
  if (cache) {
    cache->output_shape = out.shape();
    cache->valid = true;
  }
  return out;
}

// ---- backward --------------------------------------------------------------

LayerGrads layer_backward(const Layer& layer, const ForwardCache& cache, const Tensor& grad_out,
                          bool need_grad_in) {
  if (!cache.valid) throw CacheError(label(layer) + ": backward without a forward cache");
  if (cache.kind != layer.kind) {
    throw CacheError(label(layer) + ": cache belongs to a " + std::string(kind_name(cache.kind)) +
                     " layer");
  }
  grad_out.require_shape(cache.output_shape, "layer_backward grad_out");

  LayerGrads grads;
  switch (layer.kind) {
    case LayerKind::conv1d: {
      auto parts = conv_backward(cache, layer.params[0], grad_out, need_grad_in);
      grads.grad_in = std::move(parts[0]);
      grads.params = {std::move(parts[1]), std::move(parts[2])};
      break;
    }
    case LayerKind::transpose_conv1d: {
      auto parts = conv_backward(cache, tconv_to_conv_weight(layer.params[0]), grad_out, need_grad_in);
      grads.grad_in = std::move(parts[0]);
      grads.params = {conv_to_tconv_weight(parts[1]), std::move(parts[2])};
      break;
    }
    case LayerKind::avg_pool1d: {
      Tensor g(cache.input_shape);
      const std::size_t batch = g.dim(0), steps = g.dim(1), channels = g.dim(2);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < steps; ++t)
          for (std::size_t c = 0; c < channels; ++c) g.at(b, t, c) = 0.5 * grad_out.at(b, t / 2, c);
      grads.grad_in = std::move(g);
      break;
    }
    case LayerKind::upsample1d: {
      Tensor g(cache.input_shape);
      const std::size_t batch = g.dim(0), steps = g.dim(1), channels = g.dim(2);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < steps; ++t)
          for (std::size_t c = 0; c < channels; ++c)
            g.at(b, t, c) = grad_out.at(b, 2 * t, c) + grad_out.at(b, 2 * t + 1, c);
      grads.grad_in = std::move(g);
      break;
    }
    case LayerKind::dense: {
      const auto& kt = kernels::active();
      const std::size_t batch = cache.input_shape[0];
      const std::size_t n_in = layer.in_channels, n_out = layer.out_channels;
      Tensor grad_w({n_in, n_out});
      kt.gemm(true, false, n_in, n_out, batch, cache.aux.data(), grad_out.data(), grad_w.data());
      Tensor grad_b({n_out});
      for (std::size_t b = 0; b < batch; ++b) kt.axpy(1.0, grad_out.data() + b * n_out, grad_b.data(), n_out);
      if (need_grad_in) {
        grads.grad_in = Tensor({batch, n_in});
        kt.gemm(false, true, batch, n_in, n_out, grad_out.data(), layer.params[0].data(),
                grads.grad_in.data());
      }
      grads.params = {std::move(grad_w), std::move(grad_b)};
      break;
    }
    case LayerKind::batch_norm: {
      auto parts = batch_norm_backward(layer, cache, grad_out);
      grads.grad_in = std::move(parts[0]);
      grads.params = {std::move(parts[1]), std::move(parts[2])};
      break;
    }
    case LayerKind::relu: {
      Tensor g = grad_out;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(cache.aux[i] > 0.0)) g[i] = 0.0;
      grads.grad_in = std::move(g);
      break;
    }
    case LayerKind::tanh: {
      Tensor g = grad_out;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - cache.aux[i] * cache.aux[i];
      grads.grad_in = std::move(g);
      break;
    }
    case LayerKind::dropout: {
      Tensor g = grad_out;
      if (!cache.aux.empty())
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= cache.aux[i];
      grads.grad_in = std::move(g);
      break;
    }
    case LayerKind::flatten:
      grads.grad_in = grad_out.reshaped(cache.input_shape);
      break;
  }
  if (!need_grad_in) grads.grad_in = Tensor();
  return grads;
}

void update_running_stats(Layer& layer, const ForwardCache& cache) {
  if (layer.kind != LayerKind::batch_norm || !cache.valid || cache.mode != Mode::train) return;
  if (cache.kind != LayerKind::batch_norm) throw CacheError("batch_norm: cache kind mismatch");
  const std::size_t channels = layer.out_channels;
  const double rows = static_cast<double>(shape_size(cache.input_shape) / channels);
  const double keep = layer.bn_momentum;
  for (std::size_t c = 0; c < channels; ++c) {
    const double inv = cache.inv_std[c];
    const double biased_var = 1.0 / (inv * inv) - layer.bn_epsilon;
    const double unbiased_var = std::max(biased_var * rows / (rows - 1.0), 0.0);
    layer.running_mean[c] = keep * layer.running_mean[c] + (1.0 - keep) * cache.batch_mean[c];
    layer.running_var[c] = keep * layer.running_var[c] + (1.0 - keep) * unbiased_var;
  }
}

}  // namespace trajstyle::numkit
