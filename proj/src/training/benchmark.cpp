#include "exnet/training/benchmark.hpp"

#include "exnet/error.hpp"
#include "exnet/training/metrics.hpp"
#include "exnet/util/hash.hpp"

namespace exnet::training {

text::Vocab synthetic_vocab(const data::SyntheticSpec& spec) {
  const auto words = data::synthetic_words(spec);
  std::string corpus;
  for (const auto& w : words) corpus += w + ' ';
  const std::vector<std::string> docs{corpus};
  return text::build_vocab(docs, words.size() + 4 + std::size(text::kTemplateLiterals));
}

Benchmark make_benchmark(const BenchmarkSpec& spec, std::uint64_t seed, double heldout_noise) {
  Benchmark b{synthetic_vocab(spec.task), {}, {}};
  for (std::size_t t = 0; t < spec.train_tasks; ++t) {
    auto ts = spec.task;
    ts.noise_rate = t % 2 ? spec.train_noise : spec.task.noise_rate;
    b.train.push_back(gen_synthetic_task(ts, util::mix_seed(seed * 0x10000 + t)).dataset);
  }
  for (std::size_t t = 0; t < spec.heldout_tasks; ++t) {
    auto ts = spec.task;
    ts.noise_rate = heldout_noise;
    b.heldout.push_back(gen_synthetic_task(ts, util::mix_seed(~(seed * 0x10000 + t))).dataset);
  }
  return b;
}

std::vector<data::EpisodeTask> episode_tasks(std::span<const data::MultiClassDataset> datasets,
                                             std::uint64_t seed) {
  std::vector<data::EpisodeTask> tasks;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    tasks.push_back({data::binarize(datasets[i], util::mix_seed(seed ^ util::mix_seed(i))),
                     data::build_support_pool(datasets[i])});
  }
  return tasks;
}

EvalEntry evaluate_datasets(const model::ExnetModel<float>& model,
                            std::span<const data::MultiClassDataset> datasets, std::size_t k,
                            std::uint64_t seed, const text::Vocab& vocab) {
  if (datasets.empty()) throw ValidationError("datasets", "nothing to evaluate");
  std::vector<int> preds, golds;
  std::size_t dropped = 0;
  for (const auto& ds : datasets) {
    const auto eval = data::make_eval_episodes(ds, ds, k, seed, vocab, model.config().max_len);
    const auto probs = model.predict(eval.episodes);
    evaluate_probabilities(eval.episodes, probs);  // checks the fixed-support property
    for (std::size_t i = 0; i < probs.size(); ++i) {
      preds.push_back(probs[i] >= 0.5f ? 1 : 0);
      golds.push_back(eval.episodes[i].target);
    }
    dropped += eval.dropped_collisions;
  }
  const auto f = f1_score(preds, golds);
  return EvalEntry{k, f.f1, f.precision, f.recall, preds.size(), dropped};
}

}  // namespace exnet::training
