#include "trajstyle/styleloss/styleloss.hpp"

#include <cmath>
#include <string>

#include "trajstyle/error.hpp"
#include "trajstyle/numkit/kernels.hpp"

namespace trajstyle::styleloss {

using lossnet::gram;
using lossnet::kInputSteps;

void LossWeights::validate() const {
  for (double w : {content, style, position, end_position, velocity})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValueError("loss weights must be finite and >= 0");
}

void finalize(LossBreakdown& b, const LossWeights& w, bool terminal) {
  if (!terminal) b.end_position = 0.0;
  b.total = w.content * b.content + w.style * b.style + w.position * b.position + w.end_position * b.end_position +
            w.velocity * b.velocity;
  b.reward = -b.total;
}

namespace {

void require_trajectory(const Tensor& x, const char* what) {
  if (x.rank() != 2 || x.dim(1) != 3) throw ShapeError(std::string(what) + ": expected [m,3], got " + numkit::to_string(x.shape()));
}

void require_full(const Tensor& x, const char* what) { x.require_shape({kInputSteps, 3}, what); }

void require_rt(double rt) {
  if (!(rt > 0.0)) throw ValueError("rt must be positive");
}

double mse(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

Tensor self_normalized(const Tensor& x_mm, double rt) {
  Tensor out(x_mm.shape());
  for (std::size_t i = 0; i < x_mm.dim(0); ++i)
    for (std::size_t a = 0; a < 3; ++a) out.at(i, a) = (x_mm.at(i, a) - x_mm.at(0, a)) / rt;
  return out;
}

// Pulls a gradient wrt the self-normalized trajectory back to millimetres.
Tensor self_normalized_backward(const Tensor& g_norm, double rt) {
  Tensor out(g_norm.shape());
  for (std::size_t i = 0; i < g_norm.dim(0); ++i)
    for (std::size_t a = 0; a < 3; ++a) {
      out.at(i, a) += g_norm.at(i, a) / rt;
      out.at(0, a) -= g_norm.at(i, a) / rt;
    }
  return out;
}

double row_error(const Tensor& c, const Tensor& g, std::size_t row, double rt) {
  double s = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double d = (g.at(row, a) - c.at(row, a)) / rt;
    s += d * d;
  }
  return s / 3.0;
}

double velocity_mse(const Tensor& s, const Tensor& g, double rt) {
  double acc = 0.0;
  const std::size_t steps = g.dim(0) - 1;
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t a = 0; a < 3; ++a) {
      const double dg = (g.at(i + 1, a) - g.at(i, a)) / rt;
      const double ds = (s.at(i + 1, a) - s.at(i, a)) / rt;
      acc += (dg - ds) * (dg - ds);
    }
  return acc / static_cast<double>(steps * 3);
}

void check_position_args(const Tensor& c, const Tensor& g, std::size_t t, double rt) {
  require_trajectory(c, "position_constraint");
  require_trajectory(g, "position_constraint");
  require_rt(rt);
  if (t < 1 || t > kInputSteps || t > c.dim(0) || t > g.dim(0)) {
    throw ValueError("position_constraint: t must be in 1.." + std::to_string(kInputSteps) + ", got " + std::to_string(t));
  }
}

}  // namespace

double content_loss(const Autoencoder& ae, const Tensor& c_norm, const Tensor& g_norm) {
  require_full(c_norm, "content_loss C");
  require_full(g_norm, "content_loss G");
  return mse(ae.encode(c_norm), ae.encode(g_norm));
}

double style_loss(const Autoencoder& ae, const Tensor& s_norm, const Tensor& g_norm) {
  require_full(s_norm, "style_loss S");
  require_full(g_norm, "style_loss G");
  return mse(gram(ae.encode(s_norm)), gram(ae.encode(g_norm)));
}

double position_constraint(const Tensor& c_mm, const Tensor& g_mm, std::size_t t, double rt) {
  check_position_args(c_mm, g_mm, t, rt);
  return row_error(c_mm, g_mm, t - 1, rt);
}

double end_position_constraint(const Tensor& c_mm, const Tensor& g_mm, double rt) {
  require_full(c_mm, "end_position_constraint C");
  require_full(g_mm, "end_position_constraint G");
  require_rt(rt);
  return row_error(c_mm, g_mm, kInputSteps - 1, rt);
}

double velocity_constraint(const Tensor& s_mm, const Tensor& g_mm, double rt) {
  require_trajectory(g_mm, "velocity_constraint");
  s_mm.require_shape(g_mm.shape(), "velocity_constraint S");
  require_rt(rt);
  if (g_mm.dim(0) < 2) throw ShapeError("velocity_constraint needs at least 2 samples");
  return velocity_mse(s_mm, g_mm, rt);
}

LossBreakdown total_loss(const Autoencoder& ae, const Tensor& c_mm, const Tensor& s_mm, const Tensor& g_mm,
                         std::size_t t, const LossWeights& weights, double rt, bool terminal) {
  return LossModel(ae, s_mm, weights, rt).evaluate(c_mm, g_mm, t, terminal);
}

Tensor total_loss_gradient(const Autoencoder& ae, const Tensor& c_mm, const Tensor& s_mm, const Tensor& g_mm,
                           std::size_t t, const LossWeights& weights, double rt, bool terminal) {
  weights.validate();
  require_full(c_mm, "total_loss C");
  require_full(s_mm, "total_loss S");
  require_full(g_mm, "total_loss G");
  check_position_args(c_mm, g_mm, t, rt);

  const Tensor gn = self_normalized(g_mm, rt);
  const Tensor fg = ae.encode(gn);
  const std::size_t m = fg.dim(0), ch = fg.dim(1);

  // Feature-space gradient from the content and style terms.
  Tensor grad_f(fg.shape());
  if (weights.content != 0.0) {
    const Tensor fc = ae.encode(self_normalized(c_mm, rt));
    const double k = weights.content * 2.0 / static_cast<double>(fg.size());
    for (std::size_t i = 0; i < fg.size(); ++i) grad_f[i] += k * (fg[i] - fc[i]);
  }
  if (weights.style != 0.0) {
    const Tensor gs = gram(ae.encode(self_normalized(s_mm, rt)));
    const Tensor gg = gram(fg);
    // d/dGram = 2 (Gg - Gs) / C^2, symmetric; d/dF = 2 F D / m.
    Tensor d(gg.shape());
    const double k = weights.style * 2.0 / static_cast<double>(gg.size());
    for (std::size_t i = 0; i < gg.size(); ++i) d[i] = k * (gg[i] - gs[i]);
    Tensor fd({m, ch});
    numkit::kernels::active().gemm(false, false, m, ch, ch, fg.data(), d.data(), fd.data());
    const double two_over_m = 2.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < fd.size(); ++i) grad_f[i] += two_over_m * fd[i];
  }
  Tensor grad = self_normalized_backward(ae.encode_input_gradient(gn, grad_f), rt);

  const double rt2 = rt * rt;
  const auto pull_row = [&](std::size_t row, double w) {
    for (std::size_t a = 0; a < 3; ++a) grad.at(row, a) += w * 2.0 * (g_mm.at(row, a) - c_mm.at(row, a)) / (3.0 * rt2);
  };
  pull_row(t - 1, weights.position);
  if (terminal) pull_row(kInputSteps - 1, weights.end_position);

  const double kv = weights.velocity * 2.0 / static_cast<double>((kInputSteps - 1) * 3);
  for (std::size_t i = 0; i + 1 < kInputSteps; ++i)
    for (std::size_t a = 0; a < 3; ++a) {
      const double diff = ((g_mm.at(i + 1, a) - g_mm.at(i, a)) - (s_mm.at(i + 1, a) - s_mm.at(i, a))) / rt;
      grad.at(i + 1, a) += kv * diff / rt;
      grad.at(i, a) -= kv * diff / rt;
    }
  return grad;
}

LossModel::LossModel(const Autoencoder& ae, const Tensor& style_mm, const LossWeights& weights, double rt,
                     bool skip_zero_weights)
    : ae_(&ae), style_mm_(style_mm), weights_(weights), rt_(rt), skip_zero_(skip_zero_weights) {
  weights_.validate();
  require_rt(rt_);
  require_full(style_mm_, "style exemplar");
  style_mm_.require_finite("style exemplar");
  if (!(skip_zero_ && weights_.style == 0.0)) style_gram_ = gram(ae.encode(self_normalized(style_mm_, rt_)));
}

LossBreakdown LossModel::evaluate(const Tensor& c_mm, const Tensor& g_mm, std::size_t t, bool terminal) const {
  require_full(c_mm, "total_loss C");
  require_full(g_mm, "total_loss G");
  check_position_args(c_mm, g_mm, t, rt_);
  g_mm.require_finite("generated trajectory");

  const bool need_content = !(skip_zero_ && weights_.content == 0.0);
  const bool need_style = !(skip_zero_ && weights_.style == 0.0);
  LossBreakdown b;
  if (need_content || need_style) {
    const Tensor fg = ae_->encode(self_normalized(g_mm, rt_));
    if (need_content) b.content = mse(ae_->encode(self_normalized(c_mm, rt_)), fg);
    if (need_style) b.style = mse(style_gram_, gram(fg));
  }
  b.position = row_error(c_mm, g_mm, t - 1, rt_);
  if (terminal) b.end_position = row_error(c_mm, g_mm, kInputSteps - 1, rt_);
  b.velocity = velocity_mse(style_mm_, g_mm, rt_);
  finalize(b, weights_, terminal);
  return b;
}

}  // namespace trajstyle::styleloss
