#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace exnet::model {

enum class Pooling { kCls, kMean };

// kTruncNormal: every weight ~ N(0, init_std) truncated at 2 std.
// kFanIn: linear weights ~ N(0, 1/fan_in) truncated at 2 std; embeddings as
// kTruncNormal. Biases zero and layer-norm gains one in both.
enum class InitScheme { kTruncNormal, kFanIn };

struct ModelConfig {
  std::string preset = "custom";
  std::size_t vocab_size = 0;
  std::size_t d_model = 256;
  std::size_t n_layers = 6;
  std::size_t n_heads = 4;
  std::size_t ff_mult = 4;
  std::size_t max_len = 64;
  double encoder_dropout = 0.1;
  double projector_dropout = 0.3;
  std::size_t head_hidden = 0;  // 0 means d_model
  Pooling pooling = Pooling::kCls;
  InitScheme init = InitScheme::kTruncNormal;
  double init_std = 0.02;
  double layer_norm_eps = 1e-5;

  std::size_t head_width() const noexcept { return head_hidden == 0 ? d_model : head_hidden; }

  // Throws ValidationError naming the first violated constraint.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// s, m, l follow the size ladder (6/256, 12/768, 24/1024). "desk" is the
// one-layer S-ladder stand-in used for laptop-scale training; "micro" is the
// d_model=8 gradient-check configuration.
ModelConfig preset_config(const std::string& name, std::size_t vocab_size);
std::vector<std::string> preset_names();

// Closed-form parameter count; see README.
std::size_t parameter_count(const ModelConfig& cfg);

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

}  // namespace exnet::model
