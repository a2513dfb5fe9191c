#pragma once

#include <filesystem>
#include <string>

#include "trajstyle/numkit/archive.hpp"
#include "trajstyle/styleloss/styleloss.hpp"
#include "trajstyle/td3/agent.hpp"
#include "trajstyle/trajectory/trajectory.hpp"

namespace trajstyle::td3 {

// Everything needed to resume training or serve one style.
struct PolicyCheckpoint {
  std::string style_id;
  Tensor style_mm;  // [50,3] exemplar
  NetConfig net;
  TrainConfig train;
  styleloss::LossWeights weights;
  trajectory::WorkspaceConfig workspace;
  Td3Nets nets;

  void write(numkit::TensorArchive& archive) const;
  static PolicyCheckpoint read(const numkit::TensorArchive& archive);
};

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path);
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace trajstyle::td3
