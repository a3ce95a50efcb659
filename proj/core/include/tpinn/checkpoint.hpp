#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tpinn/train.hpp"

namespace tpinn {

struct Checkpoint {
  train::Surrogate model;
  std::uint64_t seed = 0;
};

// JSON object {dims, activation, params, seed, ...}. The params array
// round-trips bit-exactly; normalization, c and the coordinate map ride along
// so a checkpoint alone can make predictions.
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(std::string_view text);  // FormatError on malformed input

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tpinn
