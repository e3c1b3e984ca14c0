// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The KEC Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kec/ad/optim.hpp"
#include "kec/ad/tape.hpp"

namespace kec::ad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

// Everything needed to resume or evaluate: the model configuration as
// key=value text, named parameters, and optional optimizer state.
struct Checkpoint {
  std::string config_text;
  std::vector<NamedTensor> params;
  std::optional<AdamWConfig> optimizer_config;
  std::optional<OptimizerState> optimizer_state;
};

Checkpoint make_checkpoint(std::string config_text, const ParamStore& store, const AdamW* optimizer);

// "KECP", u32 version, payload, trailing CRC-32 over everything before it.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies values into the store; names and shapes must match exactly.
void restore_params(ParamStore& store, const Checkpoint& ck);

}  // namespace kec::ad
