#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajstyle/service/config.hpp"
#include "trajstyle/service/protocol.hpp"

namespace trajstyle::service {

namespace fs = std::filesystem;

// Writes trajectory_NNNNN.csv files drawn from the synthetic mixture.
std::vector<fs::path> gen_data(std::size_t count, std::uint64_t seed, const fs::path& out_dir,
                               const trajectory::WorkspaceConfig& ws);

// Every *.csv under dir (sorted by name), resampled to 10 Hz and cut into
// 50-sample segments.
std::vector<trajectory::Trajectory> load_segments(const fs::path& dir);

// Returns the per-epoch loss, also written to loss_log ("epoch,loss") when given.
std::vector<double> train_ae(const Config& cfg, const fs::path& data_dir, const fs::path& out_ckpt,
                             const fs::path& loss_log = {}, std::ostream* progress = nullptr);

// A style file is resampled to 10 Hz and its first 50 samples kept; shorter
// files are padded with their last sample.
numkit::Tensor load_style_exemplar(const fs::path& csv);

// Returns the per-episode reward, also written to reward_log ("episode,reward").
std::vector<double> train_policy(const Config& cfg, const fs::path& style_csv, const fs::path& ae_ckpt,
                                 const fs::path& out_ckpt, const std::string& style_id,
                                 const fs::path& reward_log = {}, std::ostream* progress = nullptr);

// Generated CSV plus a JSON report with per-segment evaluation rows.
void stylize(const fs::path& content_csv, const fs::path& policy_ckpt, const fs::path& ae_ckpt,
             const fs::path& out_csv, const fs::path& report_json);

// Every *.policy file in dir, all sharing one autoencoder checkpoint.
StyleRegistry load_styles(const fs::path& dir, const fs::path& ae_ckpt);

}  // namespace trajstyle::service
