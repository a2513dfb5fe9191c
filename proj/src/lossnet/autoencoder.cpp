#include "trajstyle/lossnet/autoencoder.hpp"

#include <numeric>
#include <string>

#include "trajstyle/error.hpp"
#include "trajstyle/numkit/kernels.hpp"

namespace trajstyle::lossnet {

using numkit::LayerKind;
using numkit::Mode;
using numkit::Rng;
using numkit::TensorArchive;

void AutoencoderConfig::validate() const {
  if (channels == 0) throw ValueError("autoencoder needs at least one channel");
  if (kernel == 0 || kernel % 2 == 0) throw ValueError("autoencoder kernel must be odd");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValueError("dropout rate must be in [0, 1)");
}

Autoencoder::Autoencoder(const AutoencoderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  encoder_.push_back(numkit::make_conv1d(3, cfg_.channels, cfg_.kernel));
  encoder_.push_back(numkit::make_simple(LayerKind::avg_pool1d));
  encoder_.push_back(numkit::make_simple(LayerKind::relu));
  encoder_.push_back(numkit::make_dropout(cfg_.dropout));
  decoder_.push_back(numkit::make_simple(LayerKind::upsample1d));
  decoder_.push_back(numkit::make_transpose_conv1d(cfg_.channels, 3, cfg_.kernel));
  const std::vector<Tensor*> params = parameters();
  adam_ = numkit::AdamState::for_parameters(std::span<Tensor* const>(params));
}

void Autoencoder::initialize(Rng& rng) {
  numkit::init_fan_in(encoder_.layers()[0], rng);
  numkit::init_fan_in(decoder_.layers()[1], rng);
  const std::vector<Tensor*> params = parameters();
  adam_ = numkit::AdamState::for_parameters(std::span<Tensor* const>(params));
  trained_ = false;
}

std::vector<Tensor*> Autoencoder::parameters() {
  std::vector<Tensor*> out = encoder_.parameters();
  for (Tensor* p : decoder_.parameters()) out.push_back(p);
  return out;
}

namespace {

// Lifts an unbatched [T, C] tensor to [1, T, C]; reports whether it did.
Tensor as_batch(const Tensor& x, std::size_t steps, std::size_t channels, const char* what, bool& lifted) {
  lifted = x.rank() == 2;
  if (lifted) {
    x.require_shape({steps, channels}, what);
    return x.reshaped({1, steps, channels});
  }
  if (x.rank() != 3 || x.dim(1) != steps || x.dim(2) != channels) {
    throw ShapeError(std::string(what) + ": expected [" + std::to_string(steps) + "," + std::to_string(channels) +
                     "] or a batch of them, got " + numkit::to_string(x.shape()));
  }
  return x;
}

Tensor unbatch(Tensor&& y, bool lifted) {
  if (!lifted) return std::move(y);
  return std::move(y).reshaped({y.dim(1), y.dim(2)});
}

}  // namespace

Tensor Autoencoder::encode(const Tensor& x) const {
  bool lifted = false;
  const Tensor in = as_batch(x, kInputSteps, 3, "encode", lifted);
  return unbatch(encoder_.forward(in, Mode::infer), lifted);
}

Tensor Autoencoder::decode(const Tensor& features) const {
  bool lifted = false;
  const Tensor in = as_batch(features, kFeatureSteps, cfg_.channels, "decode", lifted);
  return unbatch(decoder_.forward(in, Mode::infer), lifted);
}

Tensor Autoencoder::encode_input_gradient(const Tensor& x, const Tensor& grad_features) const {
  bool lifted = false, lifted_g = false;
  const Tensor in = as_batch(x, kInputSteps, 3, "encode_input_gradient", lifted);
  const Tensor g = as_batch(grad_features, kFeatureSteps, cfg_.channels, "encode_input_gradient", lifted_g);
  if (g.dim(0) != in.dim(0)) throw ShapeError("encode_input_gradient: batch sizes differ");
  numkit::SequentialCache cache;
  encoder_.forward(in, Mode::infer, nullptr, &cache);
  std::vector<Tensor> scratch = encoder_.zero_grads();
  return unbatch(encoder_.backward(cache, g, scratch), lifted);
}

void Autoencoder::write(TensorArchive& archive) const {
  archive.put("meta/kind", numkit::string_tensor("autoencoder"));
  const double arch[] = {static_cast<double>(cfg_.channels), static_cast<double>(cfg_.kernel), cfg_.dropout};
  archive.put("ae/config", numkit::vector_tensor(arch));
  archive.put("ae/trained", numkit::scalar_tensor(trained_ ? 1.0 : 0.0));
  const auto put = [&](const std::string& name, const Tensor& t) { archive.put(name, t); };
  encoder_.for_each_tensor("ae/encoder", put);
  decoder_.for_each_tensor("ae/decoder", put);
  archive.put("ae/adam/step", numkit::scalar_tensor(static_cast<double>(adam_.step)));
  for (std::size_t i = 0; i < adam_.first_moment.size(); ++i) {
    archive.put("ae/adam/m/" + std::to_string(i), adam_.first_moment[i]);
    archive.put("ae/adam/v/" + std::to_string(i), adam_.second_moment[i]);
  }
}

Autoencoder Autoencoder::read(const TensorArchive& archive) {
  if (!archive.contains("meta/kind") || numkit::tensor_string(archive.get("meta/kind")) != "autoencoder") {
    throw numkit::CheckpointError(numkit::CheckpointError::Kind::malformed, "not an autoencoder checkpoint");
  }
  const Tensor& arch = archive.get("ae/config", {3});
  AutoencoderConfig cfg;
  cfg.channels = static_cast<std::size_t>(arch[0]);
  cfg.kernel = static_cast<std::size_t>(arch[1]);
  cfg.dropout = arch[2];
  Autoencoder ae(cfg);
  ae.trained_ = archive.get("ae/trained", {1})[0] != 0.0;
  const auto take = [&](const std::string& name, Tensor& t) { t = archive.get(name, t.shape()); };
  ae.encoder_.for_each_tensor("ae/encoder", take);
  ae.decoder_.for_each_tensor("ae/decoder", take);
  ae.adam_.step = static_cast<std::uint64_t>(archive.get("ae/adam/step", {1})[0]);
  for (std::size_t i = 0; i < ae.adam_.first_moment.size(); ++i) {
    take("ae/adam/m/" + std::to_string(i), ae.adam_.first_moment[i]);
    take("ae/adam/v/" + std::to_string(i), ae.adam_.second_moment[i]);
  }
  return ae;
}

void Autoencoder::save(const std::filesystem::path& path) const {
  TensorArchive archive;
  write(archive);
  archive.save(path);
}

Autoencoder Autoencoder::load(const std::filesystem::path& path) { return read(TensorArchive::load(path)); }

void AeTrainConfig::validate() const {
  if (epochs == 0) throw ValueError("epochs must be positive");
  if (batch == 0) throw ValueError("batch size must be positive");
  if (!(lr > 0.0)) throw ValueError("learning rate must be positive");
}

namespace {

void check_dataset(const Tensor& dataset) {
  if (dataset.rank() != 3 || dataset.dim(1) != kInputSteps || dataset.dim(2) != 3) {
    throw ShapeError("dataset must be [N,50,3], got " + numkit::to_string(dataset.shape()));
  }
  if (dataset.dim(0) == 0) throw ValueError("dataset is empty");
  dataset.require_finite("dataset");
}

}  // namespace

AeTrainResult train_autoencoder(const Tensor& dataset, const AeTrainConfig& train, const AutoencoderConfig& arch) {
  if (dataset.rank() == 3 && dataset.dim(0) == 0) throw ValueError("dataset is empty");
  check_dataset(dataset);
  train.validate();

  Rng root(train.seed);
  Rng init_rng = root.split(), order_rng = root.split(), dropout_rng = root.split();
  AeTrainResult result{Autoencoder(arch), {}};
  Autoencoder& ae = result.model;
  ae.initialize(init_rng);

  const std::size_t n = dataset.dim(0), row = kInputSteps * 3;
  const std::size_t enc_params = ae.encoder().parameters().size();
  std::vector<Tensor*> params = ae.parameters();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += train.batch) {
      const std::size_t b = std::min(train.batch, n - start);
      Tensor x({b, kInputSteps, 3});
      for (std::size_t j = 0; j < b; ++j)
        std::copy_n(dataset.data() + order[start + j] * row, row, x.data() + j * row);

      numkit::SequentialCache enc_cache, dec_cache;
      const Tensor f = ae.encoder().forward(x, Mode::train, &dropout_rng, &enc_cache);
      const Tensor y = ae.decoder().forward(f, Mode::train, nullptr, &dec_cache);

      Tensor grad(y.shape());
      double sq = 0.0;
      const double scale = 2.0 / static_cast<double>(y.size());
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double d = y[k] - x[k];
        sq += d * d;
        grad[k] = scale * d;
      }
      epoch_sum += sq / static_cast<double>(row);

      std::vector<Tensor> grads = ae.encoder().zero_grads();
      for (Tensor& g : ae.decoder().zero_grads()) grads.push_back(std::move(g));
      std::span<Tensor> all(grads);
      const Tensor grad_f = ae.decoder().backward(dec_cache, grad, all.subspan(enc_params));
      ae.encoder().backward(enc_cache, grad_f, all.first(enc_params), false);
      numkit::adam_step(params, grads, ae.optimizer(), train.lr);
    }
    result.loss_history.push_back(epoch_sum / static_cast<double>(n));
  }
  ae.set_trained(true);
  return result;
}

double reconstruction_mse(const Autoencoder& ae, const Tensor& dataset) {
  check_dataset(dataset);
  // Chunked so memory stays bounded for large corpora.
  const std::size_t n = dataset.dim(0), row = kInputSteps * 3, chunk = 256;
  double sq = 0.0;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t b = std::min(chunk, n - start);
    Tensor x({b, kInputSteps, 3});
    std::copy_n(dataset.data() + start * row, b * row, x.data());
    const Tensor y = ae.reconstruct(x);
    for (std::size_t k = 0; k < y.size(); ++k) sq += (y[k] - x[k]) * (y[k] - x[k]);
  }
  return sq / static_cast<double>(n * row);
}

Tensor gram(const Tensor& features) {
  if (features.rank() != 2 || features.dim(0) == 0) {
    throw ShapeError("gram expects [m, C] features, got " + numkit::to_string(features.shape()));
  }
  const std::size_t m = features.dim(0), c = features.dim(1);
  Tensor g({c, c});
  numkit::kernels::active().gemm(true, false, c, c, m, features.data(), features.data(), g.data());
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < c; ++i) {
    g.at(i, i) *= inv_m;
    for (std::size_t j = i + 1; j < c; ++j) {
      g.at(i, j) *= inv_m;
      g.at(j, i) = g.at(i, j);
    }
  }
  return g;
}

}  // namespace trajstyle::lossnet
