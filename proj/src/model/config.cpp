#include "exnet/model/config.hpp"

#include "exnet/error.hpp"

namespace exnet::model {

using nlohmann::json;

void ModelConfig::validate() const {
  if (vocab_size < 4) throw ValidationError("vocab_size", "must be at least 4");
  if (d_model == 0) throw ValidationError("d_model", "must be positive");
  if (n_layers == 0) throw ValidationError("n_layers", "must be at least 1");
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw ValidationError("n_heads", "d_model=" + std::to_string(d_model) +
                                         " is not divisible by n_heads=" + std::to_string(n_heads));
  }
  if (ff_mult == 0) throw ValidationError("ff_mult", "must be at least 1");
  if (max_len < 3) throw ValidationError("max_len", "must be at least 3");
  if (!(encoder_dropout >= 0.0 && encoder_dropout < 1.0)) {
    throw ValidationError("encoder_dropout", "must be in [0, 1)");
  }
  if (!(projector_dropout >= 0.0 && projector_dropout < 1.0)) {
    throw ValidationError("projector_dropout", "must be in [0, 1)");
  }
  if (!(init_std > 0.0)) throw ValidationError("init_std", "must be positive");
  if (!(layer_norm_eps > 0.0)) throw ValidationError("layer_norm_eps", "must be positive");
}

ModelConfig preset_config(const std::string& name, std::size_t vocab_size) {
  ModelConfig cfg;
  cfg.preset = name;
  cfg.vocab_size = vocab_size;
  if (name == "s") {
    cfg.n_layers = 6, cfg.d_model = 256, cfg.n_heads = 4;
  } else if (name == "m") {
    cfg.n_layers = 12, cfg.d_model = 768, cfg.n_heads = 12;
  } else if (name == "l") {
    cfg.n_layers = 24, cfg.d_model = 1024, cfg.n_heads = 16;
  } else if (name == "desk") {
    cfg.n_layers = 1, cfg.d_model = 64, cfg.n_heads = 2, cfg.max_len = 24;
    cfg.pooling = Pooling::kMean;
    cfg.init = InitScheme::kFanIn;
  } else if (name == "micro") {
    cfg.n_layers = 1, cfg.d_model = 8, cfg.n_heads = 1, cfg.ff_mult = 2, cfg.max_len = 16;
  } else {
    throw ValidationError("preset", "unknown preset '" + name + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() { return {"s", "m", "l", "desk", "micro"}; }

std::size_t parameter_count(const ModelConfig& cfg) {
  const std::size_t d = cfg.d_model, f = cfg.ff_mult * d, h = cfg.head_width();
  const std::size_t embeddings = (cfg.vocab_size + cfg.max_len) * d;
  const std::size_t block = 2 * 2 * d           // two layer norms
                            + 4 * (d * d + d)   // q, k, v, o
                            + (d * f + f) + (f * d + d);
  const std::size_t final_norm = 2 * d;
  const std::size_t p1 = 3 * (d * d + d);
  const std::size_t p2 = d * d + d;
  const std::size_t cross = 4 * (d * d + d);
  const std::size_t head = (d * h + h) + (h * h + h) + (h + 1);
  return embeddings + cfg.n_layers * block + final_norm + p1 + p2 + cross + head;
}

json to_json(const ModelConfig& cfg) {
  return json{{"preset", cfg.preset},
              {"vocab_size", cfg.vocab_size},
              {"d_model", cfg.d_model},
              {"n_layers", cfg.n_layers},
              {"n_heads", cfg.n_heads},
              {"ff_mult", cfg.ff_mult},
              {"max_len", cfg.max_len},
              {"encoder_dropout", cfg.encoder_dropout},
              {"projector_dropout", cfg.projector_dropout},
              {"head_hidden", cfg.head_hidden},
              {"pooling", cfg.pooling == Pooling::kCls ? "cls" : "mean"},
              {"init", cfg.init == InitScheme::kTruncNormal ? "trunc_normal" : "fan_in"},
              {"init_std", cfg.init_std},
              {"layer_norm_eps", cfg.layer_norm_eps}};
}

ModelConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("model", "config must be a JSON object");
  ModelConfig cfg;
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset != "custom") cfg = preset_config(preset, j.value("vocab_size", std::size_t{0}));
  }
  try {
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.d_model = j.value("d_model", cfg.d_model);
    cfg.n_layers = j.value("n_layers", cfg.n_layers);
    cfg.n_heads = j.value("n_heads", cfg.n_heads);
    cfg.ff_mult = j.value("ff_mult", cfg.ff_mult);
    cfg.max_len = j.value("max_len", cfg.max_len);
    cfg.encoder_dropout = j.value("encoder_dropout", cfg.encoder_dropout);
    cfg.projector_dropout = j.value("projector_dropout", cfg.projector_dropout);
    cfg.head_hidden = j.value("head_hidden", cfg.head_hidden);
    cfg.init_std = j.value("init_std", cfg.init_std);
    cfg.layer_norm_eps = j.value("layer_norm_eps", cfg.layer_norm_eps);
  } catch (const json::exception& e) {
    throw ValidationError("model", e.what());
  }
  if (j.contains("pooling")) {
    const auto p = j.at("pooling").get<std::string>();
    if (p == "cls") cfg.pooling = Pooling::kCls;
    else if (p == "mean") cfg.pooling = Pooling::kMean;
    else throw ValidationError("pooling", "expected cls or mean, got '" + p + "'");
  }
  if (j.contains("init")) {
    const auto s = j.at("init").get<std::string>();
    if (s == "trunc_normal") cfg.init = InitScheme::kTruncNormal;
    else if (s == "fan_in") cfg.init = InitScheme::kFanIn;
    else throw ValidationError("init", "expected trunc_normal or fan_in, got '" + s + "'");
  }
  return cfg;
}

}  // namespace exnet::model
