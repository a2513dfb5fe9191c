#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "trajstyle/lossnet/autoencoder.hpp"
#include "trajstyle/styleloss/styleloss.hpp"
#include "trajstyle/td3/agent.hpp"
#include "trajstyle/trajectory/trajectory.hpp"

namespace trajstyle::service {

// Flat "key = value" file with [section] headers. Keys that are absent keep
// their defaults; unknown sections or keys are rejected. Noise levels and the
// action range default to their RT multiples for whatever rt is configured.
struct Config {
  trajectory::WorkspaceConfig workspace;
  styleloss::LossWeights weights;
  lossnet::AutoencoderConfig autoencoder;
  lossnet::AeTrainConfig ae_train;
  td3::NetConfig net;
  td3::TrainConfig train = td3::TrainConfig::for_rt(300.0);
  std::filesystem::path dataset_dir = "data";
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::uint16_t port = 8765;

  void validate() const;

  static Config parse(std::istream& in);
  static Config load(const std::filesystem::path& path);
  // The full file with every key, as written by `trajstyle config`.
  std::string to_ini() const;
};

}  // namespace trajstyle::service
