#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "trajstyle/numkit/tensor.hpp"

namespace trajstyle::trajectory {

using Vec3 = std::array<double, 3>;

inline constexpr std::size_t kSegmentLength = 50;
inline constexpr double kCanonicalRate = 10.0;

struct WorkspaceConfig {
  double rt = 300.0;  // mm
  Vec3 lo{-300.0, -300.0, -300.0};
  Vec3 hi{300.0, 300.0, 300.0};

  void validate() const;
  bool contains(const Vec3& p) const noexcept;
  Vec3 clamp(const Vec3& p) const noexcept;
};

struct Trajectory {
  std::vector<Vec3> samples;  // mm, or dimensionless once normalized
  double sample_rate = kCanonicalRate;

  std::size_t size() const noexcept { return samples.size(); }
  const Vec3& operator[](std::size_t i) const { return samples[i]; }
  Vec3& operator[](std::size_t i) { return samples[i]; }
  const Vec3& back() const { return samples.back(); }

  // Throws ValueError for fewer than 2 samples, a non-positive rate or
  // non-finite values.
  void validate() const;

  bool operator==(const Trajectory&) const = default;
};

// [m, 3] tensor of the samples.
numkit::Tensor to_tensor(const Trajectory& traj);
numkit::Tensor to_tensor(const std::vector<Vec3>& samples);
Trajectory from_tensor(const numkit::Tensor& t, double sample_rate = kCanonicalRate);

// Linear interpolation onto round(m * target / rate) samples spread evenly
// over the original index span, so both endpoints are kept exactly.
Trajectory resample(const Trajectory& traj, double target_hz);

// Repeat the last sample until there are n rows. Longer inputs are
// returned unchanged.
std::vector<Vec3> pad_last(std::vector<Vec3> samples, std::size_t n);

// 50-sample segments; the last one padded with its final sample.
std::vector<Trajectory> pad_or_split(const Trajectory& traj);

// (samples - origin) / rt, with origin defaulting to the first sample.
Trajectory normalize(const Trajectory& traj, const WorkspaceConfig& cfg);
Trajectory normalize(const Trajectory& traj, const Vec3& origin, double rt);
Trajectory denormalize(const Trajectory& norm, const Vec3& origin, const WorkspaceConfig& cfg);

// Rows of `samples` relative to `origin` divided by rt, as [rows, 3].
numkit::Tensor normalized_tensor(const std::vector<Vec3>& samples, const Vec3& origin, double rt);

// Each 50-sample trajectory normalized against its own first sample and
// stacked as [N, 50, 3].
numkit::Tensor normalized_batch(const std::vector<Trajectory>& trajs, const WorkspaceConfig& cfg);

}  // namespace trajstyle::trajectory
