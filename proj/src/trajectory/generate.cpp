#include "trajstyle/trajectory/generate.hpp"

#include <cmath>
#include <numbers>

#include "trajstyle/error.hpp"

namespace trajstyle::trajectory {

using numkit::Rng;

namespace {

constexpr std::size_t kLast = kSegmentLength - 1;

Vec3 uniform_point(Rng& rng, const WorkspaceConfig& cfg, double shrink = 0.0) {
  Vec3 p;
  for (int a = 0; a < 3; ++a) {
    const double margin = shrink * (cfg.hi[a] - cfg.lo[a]);
    p[a] = rng.uniform(cfg.lo[a] + margin, cfg.hi[a] - margin);
  }
  return p;
}

Vec3 unit_normal_vector(Rng& rng) {
  for (;;) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-6) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

// Unit vector orthogonal to `d` (Gram-Schmidt against a random direction).
Vec3 orthogonal_unit(Rng& rng, const Vec3& d) {
  for (;;) {
    Vec3 v = unit_normal_vector(rng);
    const double proj = v[0] * d[0] + v[1] * d[1] + v[2] * d[2];
    for (int a = 0; a < 3; ++a) v[a] -= proj * d[a];
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-6) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

Vec3 direction(const Vec3& from, const Vec3& to) {
  Vec3 d{to[0] - from[0], to[1] - from[1], to[2] - from[2]};
  const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (n < 1e-9) return {1.0, 0.0, 0.0};
  return {d[0] / n, d[1] / n, d[2] / n};
}

Trajectory line(Rng& rng, const WorkspaceConfig& cfg) {
  const Vec3 p0 = uniform_point(rng, cfg), p1 = uniform_point(rng, cfg);
  Trajectory out;
  out.samples.resize(kSegmentLength);
  for (std::size_t i = 0; i < kSegmentLength; ++i) {
    const double s = static_cast<double>(i) / kLast;
    for (int a = 0; a < 3; ++a) out.samples[i][a] = p0[a] + s * (p1[a] - p0[a]);
  }
  return out;
}

Trajectory arc(Rng& rng, const WorkspaceConfig& cfg) {
  const Vec3 center = uniform_point(rng, cfg, 0.2);
  const Vec3 u = unit_normal_vector(rng);
  const Vec3 v = orthogonal_unit(rng, u);
  const double span = std::min({cfg.hi[0] - cfg.lo[0], cfg.hi[1] - cfg.lo[1], cfg.hi[2] - cfg.lo[2]});
  const double radius = rng.uniform(0.08, 0.4) * span;
  const double start = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double sweep = rng.uniform(0.5, 2.0) * std::numbers::pi * (rng.below(2) ? 1.0 : -1.0);
  Trajectory out;
  out.samples.resize(kSegmentLength);
  for (std::size_t i = 0; i < kSegmentLength; ++i) {
    const double th = start + sweep * static_cast<double>(i) / kLast;
    const double c = std::cos(th), s = std::sin(th);
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = center[a] + radius * (c * u[a] + s * v[a]);
    out.samples[i] = cfg.clamp(p);
  }
  return out;
}

Trajectory sinusoid(Rng& rng, const WorkspaceConfig& cfg) {
  const Vec3 p0 = uniform_point(rng, cfg, 0.1), p1 = uniform_point(rng, cfg, 0.1);
  const Vec3 lateral = orthogonal_unit(rng, direction(p0, p1));
  const double span = std::min({cfg.hi[0] - cfg.lo[0], cfg.hi[1] - cfg.lo[1], cfg.hi[2] - cfg.lo[2]});
  const std::size_t harmonics = 1 + rng.below(3);
  double amp[3], freq[3], phase[3];
  for (std::size_t h = 0; h < harmonics; ++h) {
    amp[h] = rng.uniform(0.02, 0.12) * span;
    freq[h] = static_cast<double>(1 + rng.below(5));
    phase[h] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  Trajectory out;
  out.samples.resize(kSegmentLength);
  for (std::size_t i = 0; i < kSegmentLength; ++i) {
    const double s = static_cast<double>(i) / kLast;
    double offset = 0.0;
    for (std::size_t h = 0; h < harmonics; ++h)
      offset += amp[h] * std::sin(2.0 * std::numbers::pi * freq[h] * s + phase[h]);
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = p0[a] + s * (p1[a] - p0[a]) + offset * lateral[a];
    out.samples[i] = cfg.clamp(p);
  }
  return out;
}

}  // namespace

Trajectory random_linear_content(Rng& rng, const WorkspaceConfig& cfg) {
  cfg.validate();
  return line(rng, cfg);
}

std::vector<Trajectory> synthetic_dataset(Rng& rng, std::size_t count, const WorkspaceConfig& cfg) {
  if (count == 0) throw ValueError("synthetic dataset needs count > 0");
  cfg.validate();
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (rng.below(3)) {
      case 0: out.push_back(line(rng, cfg)); break;
      case 1: out.push_back(arc(rng, cfg)); break;
      default: out.push_back(sinusoid(rng, cfg)); break;
    }
  }
  return out;
}

Trajectory jerky_style(Rng& rng, const WorkspaceConfig& cfg, double amplitude_mm) {
  cfg.validate();
  const Vec3 p0 = uniform_point(rng, cfg, 0.3), p1 = uniform_point(rng, cfg, 0.3);
  const Vec3 lateral = orthogonal_unit(rng, direction(p0, p1));
  Trajectory out;
  out.samples.resize(kSegmentLength);
  for (std::size_t i = 0; i < kSegmentLength; ++i) {
    const double s = static_cast<double>(i) / kLast;
    const double offset = (i == 0) ? 0.0 : ((i % 2) ? amplitude_mm : -amplitude_mm);
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = p0[a] + s * (p1[a] - p0[a]) + offset * lateral[a];
    out.samples[i] = cfg.clamp(p);
  }
  return out;
}

}  // namespace trajstyle::trajectory
