#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "exnet/data/episode.hpp"
#include "exnet/model/exnet.hpp"
#include "exnet/numerics/adamw.hpp"
#include "json.hpp"

namespace exnet::training {

struct TrainConfig {
  double lr = 2e-5;
  std::size_t batch_size = 16;
  std::size_t steps = 500;  // total optimizer steps, counted across resumes
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0: only at the end
  std::size_t eval_every = 0;        // 0: never
  double weight_decay = 0.01;
  std::size_t warmup_steps = 0;  // linear ramp from 0, off by default
  std::size_t patience = 0;      // evals without improvement before stopping; 0 disables

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const TrainConfig& tc);
// Keys present in `j` override `base`; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct LossPoint {
  std::uint64_t step = 0;
  double loss = 0;
  double lr = 0;
};

// Draws one training episode.
using EpisodeSource = std::function<data::Episode(util::Rng&)>;

EpisodeSource stream_source(data::EpisodeStream& stream);
// Uniform draws from a fixed list.
EpisodeSource list_source(std::vector<data::Episode> episodes);

struct TrainHooks {
  // After the update of `step` when step % checkpoint_every == 0, and after the
  // last step.
  std::function<void(std::uint64_t step)> checkpoint;
  // Validation score (higher is better) at step % eval_every == 0.
  std::function<double(std::uint64_t step)> validate;
  // Called with every trace point as it is produced.
  std::function<void(const LossPoint&)> on_step;
};

enum class StopReason { kCompleted, kEarlyStopped, kNonFinite };

struct TrainResult {
  std::vector<LossPoint> trace;
  std::uint64_t final_step = 0;
  StopReason stop = StopReason::kCompleted;
  std::string message;  // set when stop != kCompleted
};

// Runs steps opt.step+1 .. tc.steps. Step s draws its batch and dropout masks
// from a generator seeded by (tc.seed, s) alone, so a resumed run with the
// restored optimizer state matches an uninterrupted one. A non-finite loss or
// gradient stops training before the update; the model keeps the weights of
// the previous step.
TrainResult train(model::ExnetModel<float>& model, numerics::AdamWState<float>& opt,
                  const EpisodeSource& source, const TrainConfig& tc, const TrainHooks& hooks = {});

// Mean BCE of eval-mode predictions.
double mean_bce(const model::ExnetModel<float>& model, std::span<const data::Episode> episodes);

// "step,loss,lr" CSV.
std::string loss_trace_csv(const std::vector<LossPoint>& trace);
void write_loss_trace(const std::filesystem::path& path, const std::vector<LossPoint>& trace);

}  // namespace exnet::training
