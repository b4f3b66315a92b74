#pragma once

// Versioned JSON checkpoints. Doubles are written in shortest round-trip form,
// so loading a saved checkpoint reproduces the parameters bit for bit.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dgm/network.hpp"

namespace dgm {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  std::string problem;
  NetworkParams params;
  std::int64_t iteration = 0;
  std::string rng_state;  // sampler stream state at `iteration`
  std::string config_hash;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
/// Throws ConfigError on a version mismatch, a malformed document, or theta
/// arrays whose lengths disagree with the architecture.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgm
