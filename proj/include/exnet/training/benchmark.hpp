#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exnet/data/dataset.hpp"
#include "exnet/data/episode.hpp"
#include "exnet/data/synthetic.hpp"
#include "exnet/model/exnet.hpp"
#include "exnet/text/vocab.hpp"
#include "exnet/training/evaluate.hpp"

namespace exnet::training {

// A family of synthetic tasks over one shared word pool. Every task assigns
// the pool's words to its labels differently, so a held-out task asks about
// label definitions never seen in training and can only be solved from the
// supports.
struct BenchmarkSpec {
  data::SyntheticSpec task{8, 4, 20, 40, 6, 0.0, 32};
  std::size_t train_tasks = 256;
  std::size_t heldout_tasks = 4;
  double train_noise = 0.2;  // applied to every other training task
};

struct Benchmark {
  text::Vocab vocab;
  std::vector<data::MultiClassDataset> train;
  std::vector<data::MultiClassDataset> heldout;
};

Benchmark make_benchmark(const BenchmarkSpec& spec, std::uint64_t seed, double heldout_noise);

// Vocabulary holding every word a spec can emit.
text::Vocab synthetic_vocab(const data::SyntheticSpec& spec);

// Binarized instances plus the dataset's own positives as support pool.
std::vector<data::EpisodeTask> episode_tasks(std::span<const data::MultiClassDataset> datasets,
                                             std::uint64_t seed);

// Fixed-support K-shot evaluation of each dataset, pooled into one F1.
EvalEntry evaluate_datasets(const model::ExnetModel<float>& model,
                            std::span<const data::MultiClassDataset> datasets, std::size_t k,
                            std::uint64_t seed, const text::Vocab& vocab);

}  // namespace exnet::training
