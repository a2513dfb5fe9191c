#include "trajstyle/numkit/layer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"
#include "trajstyle/error.hpp"
#include "trajstyle/numkit/sequential.hpp"

namespace trajstyle::numkit {
namespace {

using testing::random_tensor;

TEST(LayerForward, ConvOnZeroInputYieldsBiasRows) {
  Layer conv = make_conv1d(3, 4, 5);
  Rng rng(1);
  init_uniform(conv, 1.0, rng);
  const Tensor out = layer_forward(conv, Tensor({2, 50, 3}), Mode::infer);
  ASSERT_EQ(out.shape(), (Shape{2, 50, 4}));
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t t = 0; t < 50; ++t)
      for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out.at(b, t, c), conv.params[1][c]);
}

TEST(LayerForward, ReluDefinition) {
  const Tensor out = layer_forward(make_simple(LayerKind::relu), Tensor({3}, {-1.0, 0.0, 2.0}), Mode::infer);
  EXPECT_EQ(out.values()[0], 0.0);
  EXPECT_EQ(out.values()[1], 0.0);
  EXPECT_EQ(out.values()[2], 2.0);
}

TEST(LayerForward, AvgPoolMatchesWindowMeans) {
  const Tensor in({1, 4, 1}, {1.0, 3.0, 5.0, 7.0});
  const Tensor out = layer_forward(make_simple(LayerKind::avg_pool1d), in, Mode::infer);
  ASSERT_EQ(out.shape(), (Shape{1, 2, 1}));
  // Window-mean oracle.
  EXPECT_EQ(out[0], (1.0 + 3.0) / 2.0);
  EXPECT_EQ(out[1], (5.0 + 7.0) / 2.0);
}

TEST(LayerForward, ConvPreservesLengthAndMatchesDirectSum) {
  Rng rng(2);
  Layer conv = make_conv1d(2, 3, 3);
  init_uniform(conv, 1.0, rng);
  const Tensor x = random_tensor({1, 6, 2}, rng);
  const Tensor y = layer_forward(conv, x, Mode::infer);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t o = 0; o < 3; ++o) {
      double expect = conv.params[1][o];
      for (std::size_t k = 0; k < 3; ++k) {
        const long src = static_cast<long>(t + k) - 1;
        if (src < 0 || src >= 6) continue;
        for (std::size_t c = 0; c < 2; ++c) expect += x.at(0, src, c) * conv.params[0].at(k, c, o);
      }
      EXPECT_NEAR(y.at(0, t, o), expect, 1e-14);
    }
  }
}

TEST(LayerForward, TransposeConvMatchesScatterDefinition) {
  Rng rng(3);
  Layer tconv = make_transpose_conv1d(4, 2, 5);
  init_uniform(tconv, 1.0, rng);
  const Tensor x = random_tensor({2, 8, 4}, rng);
  const Tensor y = layer_forward(tconv, x, Mode::infer);
  // Scatter form: every input step t spreads W[k] onto output step t + k - pad.
  Tensor expect({2, 8, 2});
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t s = 0; s < 8; ++s)
      for (std::size_t c = 0; c < 2; ++c) expect.at(b, s, c) = tconv.params[1][c];
    for (std::size_t t = 0; t < 8; ++t)
      for (std::size_t k = 0; k < 5; ++k) {
        const long s = static_cast<long>(t + k) - 2;
        if (s < 0 || s >= 8) continue;
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t o = 0; o < 4; ++o) expect.at(b, s, c) += x.at(b, t, o) * tconv.params[0].at(k, c, o);
      }
  }
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], expect[i], 1e-13);
}

TEST(LayerForward, PoolThenUpsampleRoundTripsShape) {
  Rng rng(4);
  for (std::size_t steps : {2u, 10u, 50u}) {
    const Tensor x = random_tensor({3, steps, 2}, rng);
    const Tensor pooled = layer_forward(make_simple(LayerKind::avg_pool1d), x, Mode::infer);
    const Tensor back = layer_forward(make_simple(LayerKind::upsample1d), pooled, Mode::infer);
    EXPECT_EQ(back.shape(), x.shape());
  }
}

TEST(LayerForward, InferModeIsBitDeterministic) {
  Rng rng(5);
  for (const auto& c : testing::random_layer_cases(rng)) {
    Rng r1(9), r2(9);
    const Tensor a = layer_forward(c.layer, c.input, Mode::infer, &r1);
    const Tensor b = layer_forward(c.layer, c.input, Mode::infer, &r2);
    EXPECT_EQ(a, b) << kind_name(c.layer.kind);
  }
}

TEST(LayerForward, DropoutIsIdentityInInferMode) {
  Rng rng(6);
  const Tensor x = random_tensor({2, 4, 3}, rng);
  EXPECT_EQ(layer_forward(make_dropout(0.25), x, Mode::infer), x);
  Rng r(1);
  const Tensor y = layer_forward(make_dropout(0.25), x, Mode::train, &r);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      ++dropped;
    } else {
      EXPECT_NEAR(y[i], x[i] / 0.75, 1e-15);
    }
  }
  EXPECT_GT(dropped, 0u);
}

TEST(LayerForward, BatchNormInferUsesRunningStats) {
  Layer bn = make_batch_norm(2);
  bn.running_mean = Tensor({2}, {1.0, -1.0});
  bn.running_var = Tensor({2}, {4.0, 0.25});
  const Tensor x({1, 2}, {3.0, 0.0});
  const Tensor y = layer_forward(bn, x, Mode::infer);
  EXPECT_NEAR(y[0], 2.0 / std::sqrt(4.0 + 1e-5), 1e-15);
  EXPECT_NEAR(y[1], 1.0 / std::sqrt(0.25 + 1e-5), 1e-15);
}

TEST(LayerForward, BatchNormRunningStatsBlendWithMomentum) {
  Layer bn = make_batch_norm(1);
  const Tensor x({4, 1}, {1.0, 2.0, 3.0, 4.0});
  ForwardCache cache;
  layer_forward(bn, x, Mode::train, nullptr, &cache);
  update_running_stats(bn, cache);
  // batch mean 2.5, unbiased variance 5/3
  EXPECT_NEAR(bn.running_mean[0], 0.01 * 2.5, 1e-15);
  EXPECT_NEAR(bn.running_var[0], 0.99 + 0.01 * (5.0 / 3.0), 1e-12);
}

TEST(LayerForward, RejectsBadShapesAndNonFiniteInput) {
  Layer conv = make_conv1d(3, 4, 5);
  EXPECT_THROW(layer_forward(conv, Tensor({1, 50, 2}), Mode::infer), ShapeError);
  EXPECT_THROW(layer_forward(make_simple(LayerKind::avg_pool1d), Tensor({1, 5, 2}), Mode::infer), ShapeError);
  EXPECT_THROW(layer_forward(make_dense(3, 2), Tensor({2, 4}), Mode::infer), ShapeError);
  Tensor bad({1, 50, 3});
  bad[7] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(layer_forward(conv, bad, Mode::infer), NonFiniteError);
  EXPECT_THROW(make_conv1d(3, 4, 4), ValueError);
}

TEST(LayerBackward, DenseBiasGradientEqualsUpstream) {
  Rng rng(7);
  Layer dense = make_dense(3, 2);
  init_uniform(dense, 1.0, rng);
  ForwardCache cache;
  layer_forward(dense, random_tensor({1, 3}, rng), Mode::train, nullptr, &cache);
  const Tensor g({1, 2}, {0.25, -1.5});
  const LayerGrads grads = layer_backward(dense, cache, g);
  EXPECT_EQ(grads.params[1][0], 0.25);
  EXPECT_EQ(grads.params[1][1], -1.5);
}

TEST(LayerBackward, ReluFlatRegionHasZeroGradient) {
  ForwardCache cache;
  const Layer relu = make_simple(LayerKind::relu);
  layer_forward(relu, Tensor({2}, {-1.0, 3.0}), Mode::train, nullptr, &cache);
  const LayerGrads grads = layer_backward(relu, cache, Tensor({2}, {1.0, 1.0}));
  EXPECT_EQ(grads.grad_in[0], 0.0);
  EXPECT_EQ(grads.grad_in[1], 1.0);
}

TEST(LayerBackward, RandomConvMatchesFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    Layer conv = make_conv1d(3, 4, 5);
    init_uniform(conv, 0.5, rng);
    const Tensor x = random_tensor({2, 10, 3}, rng);
    const auto report = testing::check_layer_gradients(conv, x, Mode::train, 100 + trial);
    EXPECT_LT(report.worst(), 1e-5);
  }
}

TEST(LayerBackward, EveryKindMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    for (const auto& c : testing::random_layer_cases(rng)) {
      const auto report = testing::check_layer_gradients(c.layer, c.input, c.mode, 200 + trial);
      EXPECT_LT(report.input_error, 1e-5) << kind_name(c.layer.kind);
      EXPECT_LT(report.param_error, 1e-5) << kind_name(c.layer.kind);
    }
  }
}

TEST(LayerBackward, BatchNormInferModeGradient) {
  Rng rng(10);
  Layer bn = make_batch_norm(3);
  bn.running_var = Tensor({3}, {0.5, 2.0, 1.5});
  bn.running_mean = Tensor({3}, {0.1, -0.2, 0.3});
  const auto report = testing::check_layer_gradients(bn, random_tensor({1, 3}, rng), Mode::infer, 5);
  EXPECT_LT(report.worst(), 1e-5);
}

TEST(LayerBackward, RejectsMissingOrMismatchedCache) {
  const Layer relu = make_simple(LayerKind::relu);
  EXPECT_THROW(layer_backward(relu, ForwardCache{}, Tensor({1}, 1.0)), CacheError);
  ForwardCache cache;
  layer_forward(make_simple(LayerKind::tanh), Tensor({2}, 0.5), Mode::train, nullptr, &cache);
  EXPECT_THROW(layer_backward(relu, cache, Tensor({2}, 1.0)), CacheError);
  ForwardCache ok;
  layer_forward(relu, Tensor({2}, 0.5), Mode::train, nullptr, &ok);
  EXPECT_THROW(layer_backward(relu, ok, Tensor({3}, 1.0)), ShapeError);
}

TEST(Sequential, BackwardMatchesFiniteDifferences) {
  Rng rng(11);
  Sequential net;
  net.push_back(make_conv1d(3, 4, 3));
  net.push_back(make_simple(LayerKind::tanh));
  net.push_back(make_batch_norm(4));
  net.push_back(make_simple(LayerKind::avg_pool1d));
  net.push_back(make_simple(LayerKind::flatten));
  net.push_back(make_dense(12, 2));
  for (Layer& l : net.layers()) init_uniform(l, 0.7, rng);
  const Tensor x = random_tensor({3, 6, 3}, rng);
  const Tensor w = random_tensor({3, 2}, rng);

  auto params = net.parameters();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    DifferentiableFunction fn;
    Sequential probe = net;
    fn.value = [&](std::span<const double> p) {
      std::copy(p.begin(), p.end(), probe.parameters()[pi]->values().begin());
      return testing::weighted_sum(probe.forward(x, Mode::train), w);
    };
    fn.gradient = [&](std::span<const double> p) {
      std::copy(p.begin(), p.end(), probe.parameters()[pi]->values().begin());
      SequentialCache cache;
      probe.forward(x, Mode::train, nullptr, &cache);
      auto grads = probe.zero_grads();
      probe.backward(cache, w, grads);
      return std::vector<double>(grads[pi].values().begin(), grads[pi].values().end());
    };
    EXPECT_LT(grad_check(fn, params[pi]->values()), 1e-5) << "param " << pi;
  }
}

TEST(GradCheck, QuadraticIsExact) {
  DifferentiableFunction fn;
  fn.value = [](std::span<const double> p) { return p[0] * p[0]; };
  fn.gradient = [](std::span<const double> p) { return std::vector<double>{2.0 * p[0]}; };
  const double point[] = {3.0};
  EXPECT_LT(grad_check(fn, point), 1e-8);
}

TEST(GradCheck, DetectsWrongGradientAndNonFinite) {
  DifferentiableFunction fn;
  fn.value = [](std::span<const double> p) { return p[0] * p[0]; };
  fn.gradient = [](std::span<const double> p) { return std::vector<double>{3.0 * p[0]}; };
  const double point[] = {1.0};
  EXPECT_GT(grad_check(fn, point), 0.3);
  fn.value = [](std::span<const double> p) { return std::log(p[0]); };
  const double zero[] = {0.0};
  EXPECT_THROW(grad_check(fn, zero), NonFiniteError);
}

}  // namespace
}  // namespace trajstyle::numkit
