#pragma once

#include <cstddef>
#include <vector>

#include "trajstyle/numkit/rng.hpp"
#include "trajstyle/trajectory/trajectory.hpp"

namespace trajstyle::trajectory {

// 50 evenly spaced samples on a straight segment between two points drawn
// uniformly inside the workspace.
Trajectory random_linear_content(numkit::Rng& rng, const WorkspaceConfig& cfg);

// Mixture of lines, circular arcs and sinusoidal paths with 1-3 harmonics,
// 50 samples each, clamped to the workspace.
std::vector<Trajectory> synthetic_dataset(numkit::Rng& rng, std::size_t count,
                                          const WorkspaceConfig& cfg = {});

// A drifting path with a sharp alternating lateral offset: every sample
// flips sides, so acceleration and jerk are large compared with its travel.
Trajectory jerky_style(numkit::Rng& rng, const WorkspaceConfig& cfg, double amplitude_mm = 10.0);

}  // namespace trajstyle::trajectory
