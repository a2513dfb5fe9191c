#include "trajstyle/lossnet/autoencoder.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "test_support.hpp"
#include "trajstyle/error.hpp"
#include "trajstyle/numkit/grad_check.hpp"
#include "trajstyle/trajectory/generate.hpp"

namespace trajstyle::lossnet {
namespace {

using numkit::Rng;
using testing::random_tensor;

Autoencoder random_autoencoder(std::uint64_t seed, std::size_t channels = 8) {
  Autoencoder ae({channels, 5, 0.25});
  Rng rng(seed);
  ae.initialize(rng);
  return ae;
}

TEST(Autoencoder, ShapeContract) {
  const Autoencoder ae = random_autoencoder(1, 256);
  Rng rng(2);
  const Tensor f = ae.encode(random_tensor({50, 3}, rng));
  EXPECT_EQ(f.shape(), (numkit::Shape{25, 256}));
  for (double v : f.values()) EXPECT_GE(v, 0.0);
  EXPECT_EQ(ae.decode(random_tensor({25, 256}, rng)).shape(), (numkit::Shape{50, 3}));
  EXPECT_EQ(ae.encode(random_tensor({4, 50, 3}, rng)).shape(), (numkit::Shape{4, 25, 256}));
  EXPECT_THROW(ae.encode(Tensor({49, 3})), ShapeError);
  EXPECT_THROW(ae.decode(Tensor({25, 255})), ShapeError);
}

TEST(Autoencoder, ZeroWeightsGiveZeroFeaturesAndReconstruction) {
  const Autoencoder ae{AutoencoderConfig{16, 5, 0.25}};  // uninitialized: all zeros
  Rng rng(3);
  const Tensor f = ae.encode(random_tensor({50, 3}, rng));
  const Tensor r = ae.decode(Tensor({25, 16}));
  for (double v : f.values()) EXPECT_EQ(v, 0.0);
  for (double v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(Autoencoder, TinyEncoderMatchesHandOracle) {
  // One channel, kernel 1, weight 1, bias 0: feature t = max(0, mean over the
  // window {2t, 2t+1} of x+y+z).
  Autoencoder ae({1, 1, 0.25});
  ae.encoder().layers()[0].params[0].fill(1.0);
  Rng rng(4);
  const Tensor x = random_tensor({50, 3}, rng);
  const Tensor f = ae.encode(x);
  ASSERT_EQ(f.shape(), (numkit::Shape{25, 1}));
  for (std::size_t t = 0; t < 25; ++t) {
    const double s0 = x.at(2 * t, 0) + x.at(2 * t, 1) + x.at(2 * t, 2);
    const double s1 = x.at(2 * t + 1, 0) + x.at(2 * t + 1, 1) + x.at(2 * t + 1, 2);
    EXPECT_NEAR(f.at(t, 0), std::max(0.0, 0.5 * (s0 + s1)), 1e-15);
  }
}

TEST(Autoencoder, EncodeIsPureInInferMode) {
  const Autoencoder ae = random_autoencoder(5);
  Rng rng(6);
  const Tensor x = random_tensor({50, 3}, rng);
  EXPECT_EQ(ae.encode(x), ae.encode(x));
}

TEST(Autoencoder, EncodeInputGradientMatchesFiniteDifferences) {
  const Autoencoder ae = random_autoencoder(7);
  Rng rng(8);
  const Tensor x = random_tensor({50, 3}, rng);
  const Tensor w = random_tensor({25, 8}, rng);
  numkit::DifferentiableFunction fn;
  fn.value = [&](std::span<const double> p) {
    const Tensor f = ae.encode(Tensor({50, 3}, {p.begin(), p.end()}));
    return testing::weighted_sum(f, w);
  };
  fn.gradient = [&](std::span<const double> p) {
    const Tensor g = ae.encode_input_gradient(Tensor({50, 3}, {p.begin(), p.end()}), w);
    return std::vector<double>(g.values().begin(), g.values().end());
  };
  EXPECT_LT(numkit::grad_check(fn, x.values()), 1e-5);
}

TEST(Gram, Oracles) {
  EXPECT_EQ(gram(Tensor({25, 4})), Tensor({4, 4}));

  Rng rng(9);
  Tensor f({25, 6});
  double norm2 = 0.0;
  for (std::size_t t = 0; t < 25; ++t) {
    f.at(t, 3) = rng.uniform(-2.0, 2.0);
    norm2 += f.at(t, 3) * f.at(t, 3);
  }
  const Tensor g = gram(f);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == 3 && j == 3) {
        EXPECT_NEAR(g.at(i, j), norm2 / 25.0, 1e-14);
      } else {
        EXPECT_EQ(g.at(i, j), 0.0);
      }
    }
}

TEST(Gram, SymmetricPsdAndMatchesDirectProduct) {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor f = random_tensor({25, 37}, rng);
    const Tensor g = gram(f);
    for (std::size_t i = 0; i < 37; ++i)
      for (std::size_t j = 0; j < 37; ++j) {
        EXPECT_EQ(g.at(i, j), g.at(j, i));
        double s = 0.0;
        for (std::size_t t = 0; t < 25; ++t) s += f.at(t, i) * f.at(t, j);
        EXPECT_NEAR(g.at(i, j), s / 25.0, 1e-13);
      }
    // Quadratic-form sampling: v^T G v >= 0.
    for (int k = 0; k < 50; ++k) {
      const Tensor v = random_tensor({37}, rng);
      double q = 0.0;
      for (std::size_t i = 0; i < 37; ++i)
        for (std::size_t j = 0; j < 37; ++j) q += v[i] * g.at(i, j) * v[j];
      EXPECT_GE(q, -1e-9);
    }
  }
}

TEST(Training, ConstantDatasetFitsAndHistoryIsSeeded) {
  // Normalized trajectories start at the origin, so "constant" means zeros
  // after normalization. Use a nonzero constant to make the fit non-trivial.
  Tensor data({32, 50, 3}, 0.4);
  AeTrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch = 16;
  cfg.lr = 3e-3;
  cfg.seed = 11;
  const AeTrainResult a = train_autoencoder(data, cfg, {16, 5, 0.25});
  EXPECT_EQ(a.loss_history.size(), 400u);
  EXPECT_TRUE(a.model.trained());
  EXPECT_LT(reconstruction_mse(a.model, data), 1e-4);

  const AeTrainResult b = train_autoencoder(data, cfg, {16, 5, 0.25});
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Training, LossFallsOnSyntheticCorpus) {
  Rng rng(12);
  const trajectory::WorkspaceConfig ws;
  const Tensor data = trajectory::normalized_batch(trajectory::synthetic_dataset(rng, 64, ws), ws);
  AeTrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch = 16;
  cfg.seed = 3;
  const AeTrainResult r = train_autoencoder(data, cfg, {32, 5, 0.25});
  EXPECT_LT(r.loss_history.back(), 0.5 * r.loss_history.front());
}

TEST(Training, RejectsBadInput) {
  AeTrainConfig cfg;
  EXPECT_THROW(train_autoencoder(Tensor({0, 50, 3}), cfg), ValueError);
  EXPECT_THROW(train_autoencoder(Tensor({4, 40, 3}), cfg), ShapeError);
  cfg.epochs = 0;
  EXPECT_THROW(train_autoencoder(Tensor({4, 50, 3}), cfg), ValueError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Tensor data({8, 50, 3}, 0.1);
  AeTrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 4;
  const Autoencoder ae = train_autoencoder(data, cfg, {8, 5, 0.25}).model;
  const auto path = std::filesystem::temp_directory_path() / "trajstyle_ae_test.ckpt";
  ae.save(path);
  const Autoencoder back = Autoencoder::load(path);
  std::filesystem::remove(path);
  numkit::TensorArchive a, b;
  ae.write(a);
  back.write(b);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_TRUE(back.trained());
  EXPECT_EQ(back.config(), ae.config());
}

}  // namespace
}  // namespace trajstyle::lossnet
