#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "trajstyle/numkit/adam.hpp"
#include "trajstyle/numkit/archive.hpp"
#include "trajstyle/numkit/sequential.hpp"

namespace trajstyle::lossnet {

using numkit::Tensor;

inline constexpr std::size_t kInputSteps = 50;
inline constexpr std::size_t kFeatureSteps = 25;

struct AutoencoderConfig {
  std::size_t channels = 256;
  std::size_t kernel = 5;
  double dropout = numkit::kDefaultDropoutRate;

  void validate() const;
  bool operator==(const AutoencoderConfig&) const = default;
};

// encoder: conv1d(3->channels) -> avg_pool -> relu -> dropout
// decoder: upsample -> transpose_conv1d(channels->3)
class Autoencoder {
 public:
  explicit Autoencoder(const AutoencoderConfig& cfg = {});

  // Fan-in scaled uniform weights and fresh optimizer state.
  void initialize(numkit::Rng& rng);

  const AutoencoderConfig& config() const noexcept { return cfg_; }
  numkit::Sequential& encoder() noexcept { return encoder_; }
  const numkit::Sequential& encoder() const noexcept { return encoder_; }
  numkit::Sequential& decoder() noexcept { return decoder_; }
  const numkit::Sequential& decoder() const noexcept { return decoder_; }
  numkit::AdamState& optimizer() noexcept { return adam_; }

  bool trained() const noexcept { return trained_; }
  void set_trained(bool trained) noexcept { trained_ = trained; }

  // Infer mode. [50,3] -> [25,C] or batched [B,50,3] -> [B,25,C].
  Tensor encode(const Tensor& x) const;
  // [25,C] -> [50,3] or batched.
  Tensor decode(const Tensor& features) const;
  Tensor reconstruct(const Tensor& x) const { return decode(encode(x)); }

  // d(loss)/dx given d(loss)/d(encode(x)), same rank convention as encode.
  Tensor encode_input_gradient(const Tensor& x, const Tensor& grad_features) const;

  std::vector<Tensor*> parameters();

  void write(numkit::TensorArchive& archive) const;
  static Autoencoder read(const numkit::TensorArchive& archive);
  void save(const std::filesystem::path& path) const;
  static Autoencoder load(const std::filesystem::path& path);

 private:
  AutoencoderConfig cfg_;
  numkit::Sequential encoder_;
  numkit::Sequential decoder_;
  numkit::AdamState adam_;
  bool trained_ = false;
};

struct AeTrainConfig {
  std::size_t epochs = 1000;
  std::size_t batch = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AeTrainResult {
  Autoencoder model;
  std::vector<double> loss_history;  // mean train-mode MSE per epoch
};

// dataset: normalized trajectories stacked as [N,50,3].
AeTrainResult train_autoencoder(const Tensor& dataset, const AeTrainConfig& train,
                                const AutoencoderConfig& arch = {});

// Infer-mode mean squared reconstruction error over [N,50,3].
double reconstruction_mse(const Autoencoder& ae, const Tensor& dataset);

// F^T F / m for F of shape [m, C].
Tensor gram(const Tensor& features);

}  // namespace trajstyle::lossnet
