#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "trajstyle/trajectory/trajectory.hpp"

namespace trajstyle::trajectory {

// Rows are "x,y,z" or "t,x,y,z", optionally preceded by a header line with
// those names. When a t column is present and no rate is forced, the rate is
// taken from the first and last timestamps; otherwise it defaults to 10 Hz.
Trajectory read_csv(std::istream& in, std::optional<double> sample_rate = std::nullopt);
Trajectory read_csv(const std::filesystem::path& path, std::optional<double> sample_rate = std::nullopt);

// Writes a "t,x,y,z" header and %.17g values, so reading back is bit-exact.
void write_csv(const Trajectory& traj, std::ostream& out);
void write_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace trajstyle::trajectory
