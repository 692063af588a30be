#include "exnet/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "exnet/error.hpp"
#include "exnet/util/hash.hpp"

namespace exnet::model {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'X', 'N', 'E', 'T', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename U>
void put_le(std::string& out, U value) {
  char buf[sizeof(U)];
  std::memcpy(buf, &value, sizeof(U));
  out.append(buf, sizeof(U));
}

template <typename U>
U get_le(const char* p) {
  U value;
  std::memcpy(&value, p, sizeof(U));
  return value;
}

void put_floats(std::string& out, std::span<const float> values) {
  for (float v : values) put_le(out, std::bit_cast<std::uint32_t>(v));
}

std::string weight_bytes(const ExnetModel<float>& model) {
  std::string out;
  out.reserve(model.num_parameters() * 4);
  for (const auto& p : model.parameters()) put_floats(out, p.tensor.data());
  return out;
}

json model_manifest(const ExnetModel<float>& model, const std::string& vocab_hash,
                    const std::string& weights) {
  json tensors = json::array();
  std::size_t offset = 0;
  for (const auto& p : model.parameters()) {
    tensors.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", offset}});
    offset += p.tensor.numel();
  }
  return json{{"config", to_json(model.config())},
              {"vocab_hash", vocab_hash},
              {"tensors", tensors},
              {"weights_sha256", util::sha256_hex(weights)}};
}

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
  throw CheckpointError(CheckpointError::Kind::kCorrupt,
                        "checkpoint " + path.string() + " is corrupt: " + why);
}

[[noreturn]] void incompatible(const std::filesystem::path& path, const std::string& why) {
  throw CheckpointError(CheckpointError::Kind::kIncompatible,
                        "checkpoint " + path.string() + " is incompatible: " + why);
}

}  // namespace

std::string model_id(const ExnetModel<float>& model, const std::string& vocab_hash) {
  return util::sha256_hex(model_manifest(model, vocab_hash, weight_bytes(model)).dump());
}

std::string save_checkpoint(const std::filesystem::path& path, const ExnetModel<float>& model,
                            const std::string& vocab_hash,
                            const numerics::AdamWState<float>* optimizer, std::uint64_t train_step,
                            const json& extra) {
  std::string payload = weight_bytes(model);
  json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["model"] = model_manifest(model, vocab_hash, payload);
  manifest["train_step"] = train_step;
  manifest["extra"] = extra.is_null() ? json::object() : extra;

  std::size_t offset = model.num_parameters();
  if (optimizer != nullptr && !optimizer->m.empty()) {
    const auto& params = model.parameters();
    if (optimizer->m.size() != params.size() || optimizer->v.size() != params.size()) {
      throw ShapeError("optimizer state does not match model parameters");
    }
    json moments = json::array();
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (optimizer->m[i].size() != params[i].tensor.numel()) {
        throw ShapeError("optimizer moment size mismatch for '" + params[i].name + "'");
      }
      moments.push_back({{"name", params[i].name},
                         {"m_offset", offset},
                         {"v_offset", offset + params[i].tensor.numel()}});
      put_floats(payload, optimizer->m[i]);
      put_floats(payload, optimizer->v[i]);
      offset += 2 * params[i].tensor.numel();
    }
    const auto& h = optimizer->hyper;
    manifest["optimizer"] = {{"step", optimizer->step},
                             {"lr", h.lr},
                             {"beta1", h.beta1},
                             {"beta2", h.beta2},
                             {"eps", h.eps},
                             {"weight_decay", h.weight_decay},
                             {"moments", moments}};
  } else {
    manifest["optimizer"] = nullptr;
  }
  manifest["payload_floats"] = offset;

  const std::string manifest_text = manifest.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint64_t>(manifest_text.size()));
  out += manifest_text;
  out += payload;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write checkpoint " + tmp.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  return util::sha256_hex(manifest["model"].dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_vocab_hash) {
  std::ifstream f(path, std::ios::binary);
  if (!f) corrupt(path, "cannot open file");
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string bytes = buf.str();

  constexpr std::size_t header = sizeof(kMagic) + 4 + 8;
  if (bytes.size() < header) corrupt(path, "truncated header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) corrupt(path, "bad magic");
  const auto version = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kCheckpointVersion) {
    incompatible(path, "format version " + std::to_string(version) + ", this build reads " +
                           std::to_string(kCheckpointVersion));
  }
  const auto manifest_size = get_le<std::uint64_t>(bytes.data() + 12);
  if (manifest_size > bytes.size() - header) corrupt(path, "truncated manifest");

  json manifest;
  try {
    manifest = json::parse(bytes.substr(header, manifest_size));
  } catch (const json::exception& e) {
    corrupt(path, std::string("manifest is not valid JSON: ") + e.what());
  }

  const char* payload = bytes.data() + header + manifest_size;
  const std::size_t payload_bytes = bytes.size() - header - manifest_size;
  try {
    const auto& mm = manifest.at("model");
    const auto payload_floats = manifest.at("payload_floats").get<std::size_t>();
    if (payload_bytes != payload_floats * 4) {
      corrupt(path, "payload has " + std::to_string(payload_bytes) + " bytes, manifest expects " +
                        std::to_string(payload_floats * 4));
    }

    ModelConfig cfg;
    try {
      cfg = config_from_json(mm.at("config"));
      cfg.validate();
    } catch (const ValidationError& e) {
      incompatible(path, std::string("stored config rejected: ") + e.what());
    }
    ExnetModel<float> model(cfg, std::uint64_t{0});

    const auto& tensors = mm.at("tensors");
    auto& params = model.parameters();
    if (tensors.size() != params.size()) {
      incompatible(path, "stores " + std::to_string(tensors.size()) + " tensors, config needs " +
                             std::to_string(params.size()));
    }
    std::size_t weight_floats = 0;
    for (const auto& p : params) weight_floats += p.tensor.numel();
    if (weight_floats > payload_floats) corrupt(path, "payload shorter than the weights");
    if (util::sha256_hex(std::string_view(payload, weight_floats * 4)) !=
        mm.at("weights_sha256").get<std::string>()) {
      corrupt(path, "weight digest mismatch");
    }

    auto read_into = [&](std::span<float> dst, std::size_t offset) {
      if (offset + dst.size() > payload_floats) corrupt(path, "tensor offset outside payload");
      for (std::size_t j = 0; j < dst.size(); ++j) {
        dst[j] = std::bit_cast<float>(get_le<std::uint32_t>(payload + 4 * (offset + j)));
      }
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto name = tensors[i].at("name").get<std::string>();
      const auto shape = tensors[i].at("shape").get<numerics::Shape>();
      if (name != params[i].name || shape != params[i].tensor.shape()) {
        incompatible(path, "tensor '" + name + "' " + numerics::shape_to_string(shape) +
                               " does not match expected '" + params[i].name + "' " +
                               numerics::shape_to_string(params[i].tensor.shape()));
      }
      read_into(params[i].tensor.mutable_data(), tensors[i].at("offset").get<std::size_t>());
    }

    const auto vocab_hash = mm.at("vocab_hash").get<std::string>();
    if (expected_vocab_hash && *expected_vocab_hash != vocab_hash) {
      incompatible(path, "vocabulary hash " + vocab_hash + " differs from " + *expected_vocab_hash);
    }

    std::optional<numerics::AdamWState<float>> optimizer;
    const auto& opt = manifest.at("optimizer");
    if (!opt.is_null()) {
      numerics::AdamWState<float> state;
      state.step = opt.at("step").get<std::uint64_t>();
      state.hyper = {opt.at("lr").get<double>(), opt.at("beta1").get<double>(),
                     opt.at("beta2").get<double>(), opt.at("eps").get<double>(),
                     opt.at("weight_decay").get<double>()};
      const auto& moments = opt.at("moments");
      if (moments.size() != params.size()) incompatible(path, "optimizer moment count mismatch");
      for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<float> m(params[i].tensor.numel()), v(params[i].tensor.numel());
        read_into(m, moments[i].at("m_offset").get<std::size_t>());
        read_into(v, moments[i].at("v_offset").get<std::size_t>());
        state.m.push_back(std::move(m));
        state.v.push_back(std::move(v));
      }
      optimizer = std::move(state);
    }

    return Checkpoint{std::move(model), vocab_hash, util::sha256_hex(mm.dump()), std::move(optimizer),
                      manifest.at("train_step").get<std::uint64_t>(),
                      manifest.value("extra", json::object())};
  } catch (const json::exception& e) {
    corrupt(path, std::string("manifest is missing fields: ") + e.what());
  }
}

}  // namespace exnet::model
