#pragma once

#include <cstdint>
#include <string>

#include "wpfm/velocity_net.hpp"

namespace wpfm {

struct CheckpointMeta {
  uint64_t step_count = 0;
  std::string config_hash;
  double shift_s = 0.1;
  bool shift_targets = true;
  std::string warp;  // WarpFunction::name() form
};

// Layout: magic "WPFMCKPT", u32 format version, u32 header length, JSON
// header (architecture, block shapes, meta), then all parameters as
// little-endian float64 in declaration order. Atomic write.
void save_checkpoint(const std::string& path, const VelocityField& net,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  NetConfig config;
  CheckpointMeta meta;
  std::vector<VelocityField::BlockShape> blocks;
  Vec params;
};

// Parses and validates the file without building a network.
LoadedCheckpoint read_checkpoint(const std::string& path);

// Rebuilds the network from the stored architecture and parameters.
VelocityField load_checkpoint(const std::string& path,
                              CheckpointMeta* meta = nullptr);

}  // namespace wpfm
