#include "trajstyle/trajectory/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trajstyle/error.hpp"

namespace trajstyle::trajectory {

using numkit::Tensor;

void WorkspaceConfig::validate() const {
  if (!(rt > 0.0) || !std::isfinite(rt)) throw ValueError("workspace rt must be positive, got " + std::to_string(rt));
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(lo[a] < hi[a])) {
      throw ValueError("workspace bounds on axis " + std::to_string(a) + " need min < max");
    }
  }
}

bool WorkspaceConfig::contains(const Vec3& p) const noexcept {
  for (int a = 0; a < 3; ++a)
    if (!(p[a] >= lo[a] && p[a] <= hi[a])) return false;
  return true;
}

Vec3 WorkspaceConfig::clamp(const Vec3& p) const noexcept {
  return {std::clamp(p[0], lo[0], hi[0]), std::clamp(p[1], lo[1], hi[1]), std::clamp(p[2], lo[2], hi[2])};
}

void Trajectory::validate() const {
  if (samples.size() < 2) throw ValueError("trajectory needs at least 2 samples, got " + std::to_string(samples.size()));
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ValueError("sample rate must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (double v : samples[i])
      if (!std::isfinite(v)) throw NonFiniteError("trajectory sample " + std::to_string(i) + " is not finite");
}

Tensor to_tensor(const std::vector<Vec3>& samples) {
  Tensor out({samples.size(), 3});
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t a = 0; a < 3; ++a) out.at(i, a) = samples[i][a];
  return out;
}

Tensor to_tensor(const Trajectory& traj) { return to_tensor(traj.samples); }

Trajectory from_tensor(const Tensor& t, double sample_rate) {
  if (t.rank() != 2 || t.dim(1) != 3) throw ShapeError("trajectory tensor must be [m, 3], got " + numkit::to_string(t.shape()));
  Trajectory out;
  out.sample_rate = sample_rate;
  out.samples.resize(t.dim(0));
  for (std::size_t i = 0; i < t.dim(0); ++i) out.samples[i] = {t.at(i, 0), t.at(i, 1), t.at(i, 2)};
  return out;
}

Trajectory resample(const Trajectory& traj, double target_hz) {
  traj.validate();
  if (!(target_hz > 0.0) || !std::isfinite(target_hz)) throw ValueError("target rate must be positive");
  const std::size_t m = traj.size();
  const auto n = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(static_cast<double>(m) * target_hz / traj.sample_rate)));

  Trajectory out;
  out.sample_rate = target_hz;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // i * (m-1) / (n-1) is an exact integer whenever the grids align.
    const double pos = static_cast<double>(i * (m - 1)) / static_cast<double>(n - 1);
    const auto j = std::min(static_cast<std::size_t>(pos), m - 1);
    const double frac = pos - static_cast<double>(j);
    if (j + 1 >= m || frac == 0.0) {
      out.samples[i] = traj.samples[j];
      continue;
    }
    for (int a = 0; a < 3; ++a) {
      const double x0 = traj.samples[j][a], x1 = traj.samples[j + 1][a];
      out.samples[i][a] = x0 + frac * (x1 - x0);
    }
  }
  return out;
}

std::vector<Vec3> pad_last(std::vector<Vec3> samples, std::size_t n) {
  if (samples.empty()) throw ValueError("cannot pad an empty trajectory");
  if (samples.size() < n) samples.resize(n, samples.back());
  return samples;
}

std::vector<Trajectory> pad_or_split(const Trajectory& traj) {
  if (traj.samples.empty()) throw ValueError("cannot segment an empty trajectory");
  if (std::abs(traj.sample_rate - kCanonicalRate) > 1e-9) {
    throw ValueError("segmentation expects " + std::to_string(kCanonicalRate) + " Hz input, got " +
                     std::to_string(traj.sample_rate));
  }
  std::vector<Trajectory> out;
  for (std::size_t start = 0; start < traj.size(); start += kSegmentLength) {
    const std::size_t stop = std::min(start + kSegmentLength, traj.size());
    Trajectory seg;
    seg.sample_rate = traj.sample_rate;
    seg.samples = pad_last({traj.samples.begin() + static_cast<std::ptrdiff_t>(start),
                            traj.samples.begin() + static_cast<std::ptrdiff_t>(stop)},
                           kSegmentLength);
    out.push_back(std::move(seg));
  }
  return out;
}

Trajectory normalize(const Trajectory& traj, const Vec3& origin, double rt) {
  if (!(rt > 0.0)) throw ValueError("rt must be positive");
  Trajectory out = traj;
  for (Vec3& p : out.samples)
    for (int a = 0; a < 3; ++a) p[a] = (p[a] - origin[a]) / rt;
  return out;
}

Trajectory normalize(const Trajectory& traj, const WorkspaceConfig& cfg) {
  cfg.validate();
  if (traj.samples.empty()) throw ValueError("cannot normalize an empty trajectory");
  return normalize(traj, traj.samples.front(), cfg.rt);
}

Trajectory denormalize(const Trajectory& norm, const Vec3& origin, const WorkspaceConfig& cfg) {
  cfg.validate();
  Trajectory out = norm;
  for (Vec3& p : out.samples)
    for (int a = 0; a < 3; ++a) p[a] = p[a] * cfg.rt + origin[a];
  return out;
}

Tensor normalized_tensor(const std::vector<Vec3>& samples, const Vec3& origin, double rt) {
  Tensor out({samples.size(), 3});
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t a = 0; a < 3; ++a) out.at(i, a) = (samples[i][a] - origin[a]) / rt;
  return out;
}

Tensor normalized_batch(const std::vector<Trajectory>& trajs, const WorkspaceConfig& cfg) {
  cfg.validate();
  Tensor out({trajs.size(), kSegmentLength, 3});
  for (std::size_t n = 0; n < trajs.size(); ++n) {
    const Trajectory& t = trajs[n];
    if (t.size() != kSegmentLength) {
      throw ShapeError("trajectory " + std::to_string(n) + " has " + std::to_string(t.size()) + " samples, expected 50");
    }
    for (std::size_t i = 0; i < kSegmentLength; ++i)
      for (std::size_t a = 0; a < 3; ++a) out.at(n, i, a) = (t[i][a] - t[0][a]) / cfg.rt;
  }
  return out;
}

}  // namespace trajstyle::trajectory
