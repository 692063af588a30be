#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "exnet/model/exnet.hpp"
#include "exnet/numerics/adamw.hpp"
#include "json.hpp"

namespace exnet::model {

// Archive layout:
//
//   "EXNETCKP"                 8-byte magic
//   u32 format_version         little endian
//   u64 manifest_bytes         little endian
//   manifest                   UTF-8 JSON
//   payload                    little-endian float32 values
//
// The manifest records the config, the vocabulary hash, and the name,
// shape and payload offset (in floats) of every tensor, optimizer moments
// included. model_id is the SHA-256 of the model part of the manifest, which
// covers the weights through their payload digest.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ExnetModel<float> model;
  std::string vocab_hash;
  std::string model_id;
  std::optional<numerics::AdamWState<float>> optimizer;
  std::uint64_t train_step = 0;
  nlohmann::json extra;  // free-form run metadata
};

// Writes atomically (temp file + rename). Returns the model id.
std::string save_checkpoint(const std::filesystem::path& path, const ExnetModel<float>& model,
                            const std::string& vocab_hash,
                            const numerics::AdamWState<float>* optimizer = nullptr,
                            std::uint64_t train_step = 0, const nlohmann::json& extra = {});

// Throws CheckpointError(kCorrupt) for unreadable or damaged files and
// CheckpointError(kIncompatible) for a different format version, tensors that
// disagree with the stored config, or a vocabulary hash other than
// `expected_vocab_hash` when one is given.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_vocab_hash = std::nullopt);

// model_id for an in-memory model, identical to what save_checkpoint returns.
std::string model_id(const ExnetModel<float>& model, const std::string& vocab_hash);

}  // namespace exnet::model
