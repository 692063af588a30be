#include "exnet/training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "exnet/error.hpp"
#include "exnet/numerics/ops.hpp"
#include "exnet/training/metrics.hpp"
#include "exnet/util/hash.hpp"

namespace exnet::training {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("lr", "must be finite and >= 0");
  if (batch_size < 1) throw ValidationError("batch_size", "must be at least 1");
  if (k_min < 1 || k_max < k_min) {
    throw ValidationError("k_range", "need 1 <= k_min <= k_max, got " + std::to_string(k_min) +
                                         ".." + std::to_string(k_max));
  }
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay", "must be >= 0");
}

json to_json(const TrainConfig& tc) {
  return json{{"lr", tc.lr},
              {"batch_size", tc.batch_size},
              {"steps", tc.steps},
              {"k_min", tc.k_min},
              {"k_max", tc.k_max},
              {"seed", tc.seed},
              {"checkpoint_every", tc.checkpoint_every},
              {"eval_every", tc.eval_every},
              {"weight_decay", tc.weight_decay},
              {"warmup_steps", tc.warmup_steps},
              {"patience", tc.patience}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig tc) {
  if (!j.is_object()) throw ValidationError("train", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "lr") tc.lr = value.get<double>();
      else if (key == "batch_size") tc.batch_size = value.get<std::size_t>();
      else if (key == "steps") tc.steps = value.get<std::size_t>();
      else if (key == "k_min") tc.k_min = value.get<std::size_t>();
      else if (key == "k_max") tc.k_max = value.get<std::size_t>();
      else if (key == "seed") tc.seed = value.get<std::uint64_t>();
      else if (key == "checkpoint_every") tc.checkpoint_every = value.get<std::size_t>();
      else if (key == "eval_every") tc.eval_every = value.get<std::size_t>();
      else if (key == "weight_decay") tc.weight_decay = value.get<double>();
      else if (key == "warmup_steps") tc.warmup_steps = value.get<std::size_t>();
      else if (key == "patience") tc.patience = value.get<std::size_t>();
      else throw ValidationError(key, "unknown training option");
    } catch (const json::exception& e) {
      throw ValidationError(key, std::string("bad value: ") + e.what());
    }
  }
  tc.validate();
  return tc;
}

EpisodeSource stream_source(data::EpisodeStream& stream) {
  return [&stream](util::Rng& rng) { return stream.next(rng); };
}

EpisodeSource list_source(std::vector<data::Episode> episodes) {
  if (episodes.empty()) throw ValidationError("episodes", "episode list is empty");
  auto shared = std::make_shared<const std::vector<data::Episode>>(std::move(episodes));
  return [shared](util::Rng& rng) { return (*shared)[util::uniform_index(rng, shared->size())]; };
}

namespace {

double step_lr(const TrainConfig& tc, std::uint64_t step) {
  if (tc.warmup_steps == 0 || step >= tc.warmup_steps) return tc.lr;
  return tc.lr * double(step) / double(tc.warmup_steps);
}

}  // namespace

TrainResult train(model::ExnetModel<float>& model, numerics::AdamWState<float>& opt,
                  const EpisodeSource& source, const TrainConfig& tc, const TrainHooks& hooks) {
  tc.validate();
  if (!source) throw ValidationError("episodes", "no episode source");
  auto& params = model.parameters();
  opt.hyper.weight_decay = tc.weight_decay;

  TrainResult result;
  result.final_step = opt.step;
  double best = -INFINITY;
  std::size_t stale_evals = 0;

  for (std::uint64_t step = opt.step + 1; step <= tc.steps; ++step) {
    util::Rng rng(util::mix_seed(tc.seed ^ util::mix_seed(step)));
    std::vector<data::Episode> batch;
    batch.reserve(tc.batch_size);
    for (std::size_t i = 0; i < tc.batch_size; ++i) batch.push_back(source(rng));
    std::vector<const data::Episode*> ptrs;
    std::vector<float> targets;
    for (const auto& ep : batch) {
      ptrs.push_back(&ep);
      targets.push_back(static_cast<float>(ep.target));
    }

    for (auto& p : params) p.tensor.zero_grad();
    auto probs = model.forward_batch(ptrs, numerics::Mode::kTrain, rng);
    auto loss = numerics::mean_binary_cross_entropy<float>(probs, targets, float(kBceEps));
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value)) {
      result.stop = StopReason::kNonFinite;
      result.message = "non-finite loss at step " + std::to_string(step);
      break;
    }
    loss.backward();

    const double lr = step_lr(tc, step);
    opt.hyper.lr = lr;
    try {
      numerics::adamw_step<float>(params, opt);
    } catch (const NumericError& e) {
      result.stop = StopReason::kNonFinite;
      result.message = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    result.final_step = step;
    const LossPoint point{step, loss_value, lr};
    result.trace.push_back(point);
    if (hooks.on_step) hooks.on_step(point);

    const bool last = step == tc.steps;
    if (hooks.checkpoint && ((tc.checkpoint_every > 0 && step % tc.checkpoint_every == 0) || last)) {
      hooks.checkpoint(step);
    }
    if (hooks.validate && tc.eval_every > 0 && step % tc.eval_every == 0) {
      const double score = hooks.validate(step);
      if (score > best) {
        best = score;
        stale_evals = 0;
      } else if (tc.patience > 0 && ++stale_evals >= tc.patience) {
        result.stop = StopReason::kEarlyStopped;
        result.message = "no validation improvement in " + std::to_string(tc.patience) +
                         " evaluations, stopped at step " + std::to_string(step);
        if (hooks.checkpoint && !last && (tc.checkpoint_every == 0 || step % tc.checkpoint_every)) {
          hooks.checkpoint(step);
        }
        break;
      }
    }
  }
  for (auto& p : params) p.tensor.zero_grad();
  return result;
}

double mean_bce(const model::ExnetModel<float>& model, std::span<const data::Episode> episodes) {
  if (episodes.empty()) throw ValidationError("episodes", "episode list is empty");
  const auto probs = model.predict(episodes);
  double total = 0;
  for (std::size_t i = 0; i < episodes.size(); ++i) total += bce_loss(probs[i], episodes[i].target);
  return total / double(episodes.size());
}

std::string loss_trace_csv(const std::vector<LossPoint>& trace) {
  std::string out = "step,loss,lr\n";
  char line[96];
  for (const auto& p : trace) {
    std::snprintf(line, sizeof(line), "%llu,%.9g,%.9g\n", static_cast<unsigned long long>(p.step),
                  p.loss, p.lr);
    out += line;
  }
  return out;
}

void write_loss_trace(const std::filesystem::path& path, const std::vector<LossPoint>& trace) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << loss_trace_csv(trace);
}

}  // namespace exnet::training
