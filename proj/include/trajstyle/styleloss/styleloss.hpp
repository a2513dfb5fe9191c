#pragma once

#include <cstddef>

#include "trajstyle/lossnet/autoencoder.hpp"

namespace trajstyle::styleloss {

using lossnet::Autoencoder;
using numkit::Tensor;

struct LossWeights {
  double content = 100.0;
  double style = 1.0;
  double position = 0.1;
  double end_position = 1.0;
  double velocity = 20.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

struct LossBreakdown {
  double content = 0.0;
  double style = 0.0;
  double position = 0.0;
  double end_position = 0.0;
  double velocity = 0.0;
  double total = 0.0;
  double reward = 0.0;
};

// Weighted sum. end_position is zeroed unless terminal. Fills total and reward.
void finalize(LossBreakdown& b, const LossWeights& w, bool terminal);

// Feature-space terms on normalized [50,3] inputs.
double content_loss(const Autoencoder& ae, const Tensor& c_norm, const Tensor& g_norm);
double style_loss(const Autoencoder& ae, const Tensor& s_norm, const Tensor& g_norm);

// Constraint terms on [50,3] trajectories in millimetres. t is the 1-based
// sample number, 1 <= t <= 50.
double position_constraint(const Tensor& c_mm, const Tensor& g_mm, std::size_t t, double rt);
double end_position_constraint(const Tensor& c_mm, const Tensor& g_mm, double rt);
double velocity_constraint(const Tensor& s_mm, const Tensor& g_mm, double rt);

// Each trajectory is normalized against its own first sample before the
// feature terms. G must already be filled through sample t and padded with
// its last value.
LossBreakdown total_loss(const Autoencoder& ae, const Tensor& c_mm, const Tensor& s_mm, const Tensor& g_mm,
                         std::size_t t, const LossWeights& weights, double rt, bool terminal);

// d(total)/d(g_mm), [50,3].
Tensor total_loss_gradient(const Autoencoder& ae, const Tensor& c_mm, const Tensor& s_mm, const Tensor& g_mm,
                           std::size_t t, const LossWeights& weights, double rt, bool terminal);

// total_loss with the exemplar's features precomputed. With
// skip_zero_weights, terms whose weight is zero are not evaluated and report 0.
class LossModel {
 public:
  LossModel(const Autoencoder& ae, const Tensor& style_mm, const LossWeights& weights, double rt,
            bool skip_zero_weights = false);

  LossBreakdown evaluate(const Tensor& c_mm, const Tensor& g_mm, std::size_t t, bool terminal) const;

  const LossWeights& weights() const noexcept { return weights_; }
  double rt() const noexcept { return rt_; }
  const Tensor& style() const noexcept { return style_mm_; }

 private:
  const Autoencoder* ae_;
  Tensor style_mm_;
  Tensor style_gram_;
  LossWeights weights_;
  double rt_;
  bool skip_zero_;
};

}  // namespace trajstyle::styleloss
