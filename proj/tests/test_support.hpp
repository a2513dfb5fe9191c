#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "trajstyle/numkit/grad_check.hpp"
#include "trajstyle/numkit/layer.hpp"
#include "trajstyle/numkit/rng.hpp"
#include "trajstyle/numkit/tensor.hpp"

namespace trajstyle::testing {

using numkit::Layer;
using numkit::Mode;
using numkit::Rng;
using numkit::Shape;
using numkit::Tensor;

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline double weighted_sum(const Tensor& a, const Tensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * w[i];
  return s;
}

// Finite-difference check of one layer on f = sum(w * layer(x)). The forward
// pass is the only thing the oracle uses; dropout draws the same mask on every
// evaluation because each call starts from a copy of the same rng.
struct LayerGradReport {
  double input_error = 0.0;
  double param_error = 0.0;
  double worst() const { return std::max(input_error, param_error); }
};

inline LayerGradReport check_layer_gradients(const Layer& layer, const Tensor& x, Mode mode,
                                             std::uint64_t seed, double step = 1e-5) {
  Rng rng(seed);
  const Rng mask_rng = rng.split();
  Tensor probe_out;
  {
    Rng r = mask_rng;
    probe_out = numkit::layer_forward(layer, x, mode, &r);
  }
  const Tensor w = random_tensor(probe_out.shape(), rng);

  auto forward_sum = [&](const Layer& l, const Tensor& input) {
    Rng r = mask_rng;
    return weighted_sum(numkit::layer_forward(l, input, mode, &r), w);
  };
  auto analytic = [&](const Layer& l, const Tensor& input) {
    Rng r = mask_rng;
    numkit::ForwardCache cache;
    numkit::layer_forward(l, input, mode, &r, &cache);
    return numkit::layer_backward(l, cache, w);
  };

  LayerGradReport report;
  {
    numkit::DifferentiableFunction fn;
    fn.value = [&](std::span<const double> p) {
      Tensor input(x.shape(), std::vector<double>(p.begin(), p.end()));
      return forward_sum(layer, input);
    };
    fn.gradient = [&](std::span<const double> p) {
      Tensor input(x.shape(), std::vector<double>(p.begin(), p.end()));
      const auto g = analytic(layer, input).grad_in;
      return std::vector<double>(g.values().begin(), g.values().end());
    };
    report.input_error = numkit::grad_check(fn, x.values(), step);
  }
  for (std::size_t pi = 0; pi < layer.params.size(); ++pi) {
    numkit::DifferentiableFunction fn;
    fn.value = [&](std::span<const double> p) {
      Layer l = layer;
      l.params[pi] = Tensor(layer.params[pi].shape(), std::vector<double>(p.begin(), p.end()));
      return forward_sum(l, x);
    };
    fn.gradient = [&](std::span<const double> p) {
      Layer l = layer;
      l.params[pi] = Tensor(layer.params[pi].shape(), std::vector<double>(p.begin(), p.end()));
      const auto g = analytic(l, x).params[pi];
      return std::vector<double>(g.values().begin(), g.values().end());
    };
    report.param_error = std::max(report.param_error, numkit::grad_check(fn, layer.params[pi].values(), step));
  }
  return report;
}

// Random instance of every layer kind with an input that suits it.
struct LayerCase {
  Layer layer;
  Tensor input;
  Mode mode;
};

inline std::vector<LayerCase> random_layer_cases(Rng& rng) {
  using numkit::LayerKind;
  std::vector<LayerCase> cases;
  const std::size_t batch = 2 + rng.below(2);
  const std::size_t steps = 2 * (2 + rng.below(3));
  const std::size_t cin = 1 + rng.below(3);
  const std::size_t cout = 1 + rng.below(3);
  const std::size_t kernel = 1 + 2 * rng.below(3);

  auto init = [&](Layer l) {
    numkit::init_uniform(l, 0.8, rng);
    return l;
  };
  auto seq_input = [&](std::size_t c) { return random_tensor({batch, steps, c}, rng); };
  // Keep values away from the ReLU kink so the central difference stays on
  // one side of it.
  auto kinkfree = [&](Shape shape) {
    Tensor t(shape);
    for (double& v : t.values()) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 1.0);
    return t;
  };

  cases.push_back({init(numkit::make_conv1d(cin, cout, kernel)), seq_input(cin), Mode::train});
  cases.push_back({init(numkit::make_transpose_conv1d(cin, cout, kernel)), seq_input(cin), Mode::train});
  cases.push_back({numkit::make_simple(LayerKind::avg_pool1d), seq_input(cin), Mode::train});
  cases.push_back({numkit::make_simple(LayerKind::upsample1d), seq_input(cin), Mode::train});
  cases.push_back({init(numkit::make_dense(cin + 2, cout + 1)), random_tensor({batch, cin + 2}, rng), Mode::train});
  {
    Layer bn = numkit::make_batch_norm(cout);
    for (double& v : bn.params[0].values()) v = rng.uniform(0.5, 1.5);
    for (double& v : bn.params[1].values()) v = rng.uniform(-0.5, 0.5);
    cases.push_back({bn, random_tensor({batch, steps, cout}, rng, -2.0, 2.0), Mode::train});
    Layer bn_dense = numkit::make_batch_norm(cout + 2);
    for (double& v : bn_dense.params[0].values()) v = rng.uniform(0.5, 1.5);
    cases.push_back({bn_dense, random_tensor({batch + 2, cout + 2}, rng, -2.0, 2.0), Mode::train});
  }
  cases.push_back({numkit::make_simple(LayerKind::relu), kinkfree({batch, steps, cin}), Mode::train});
  cases.push_back({numkit::make_simple(LayerKind::tanh), seq_input(cin), Mode::train});
  cases.push_back({numkit::make_dropout(0.25), seq_input(cin), Mode::train});
  cases.push_back({numkit::make_simple(LayerKind::flatten), seq_input(cin), Mode::train});
  return cases;
}

}  // namespace trajstyle::testing
