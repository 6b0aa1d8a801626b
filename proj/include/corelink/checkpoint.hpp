#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "corelink/model.hpp"

namespace corelink {

// Training-state metadata stored alongside the parameters; the whole record
// round-trips bit-exactly.
struct CheckpointMeta {
  int epoch = 0;
  std::int64_t optimizer_steps = 0;
  double best_metric = 0.0;
  int patience_used = 0;
  std::string rng_state;
};

void save_checkpoint(const std::filesystem::path& path, const JointModel& model,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  std::unique_ptr<JointModel> model;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace corelink
