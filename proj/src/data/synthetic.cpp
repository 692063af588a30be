#include "exnet/data/synthetic.hpp"

#include <set>

#include "exnet/error.hpp"
#include "exnet/util/random.hpp"

namespace exnet::data {

namespace {

std::size_t pool_size(const SyntheticSpec& spec) {
  return spec.word_pool == 0 ? spec.n_labels * spec.vocab_per_label : spec.word_pool;
}

void validate(const SyntheticSpec& spec) {
  if (spec.n_labels < 2) throw ValidationError("n_labels", "need at least 2 labels");
  if (spec.vocab_per_label < 1) throw ValidationError("vocab_per_label", "must be at least 1");
  if (spec.text_len < 1) throw ValidationError("text_len", "must be at least 1");
  if (spec.texts_per_label < 1) throw ValidationError("texts_per_label", "must be at least 1");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) {
    throw ValidationError("noise_rate", "must be in [0, 1]");
  }
  if (spec.noise_rate > 0.0 && spec.shared_vocab == 0) {
    throw ValidationError("shared_vocab", "noise needs at least one shared word");
  }
  if (pool_size(spec) < spec.n_labels * spec.vocab_per_label) {
    throw ValidationError("word_pool", "smaller than n_labels * vocab_per_label");
  }
}

}  // namespace

std::vector<std::string> synthetic_words(const SyntheticSpec& spec) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pool_size(spec); ++i) out.push_back("w" + std::to_string(i));
  for (std::size_t i = 0; i < spec.shared_vocab; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

SyntheticTask gen_synthetic_task(const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  util::Rng rng(seed);
  SyntheticTask task;
  for (std::size_t i = 0; i < spec.shared_vocab; ++i) task.shared.push_back("s" + std::to_string(i));

  const auto words = util::sample_without_replacement(rng, pool_size(spec),
                                                      spec.n_labels * spec.vocab_per_label);
  for (std::size_t l = 0; l < spec.n_labels; ++l) {
    std::vector<std::string> sig;
    for (std::size_t j = 0; j < spec.vocab_per_label; ++j) {
      sig.push_back("w" + std::to_string(words[l * spec.vocab_per_label + j]));
    }
    task.labels.push_back(sig.front());
    task.signatures.push_back(std::move(sig));
  }

  std::vector<Record> records;
  for (std::size_t l = 0; l < spec.n_labels; ++l) {
    const auto& sig = task.signatures[l];
    std::set<std::string> seen;
    std::size_t misses = 0;
    while (seen.size() < spec.texts_per_label && misses < 50 * spec.texts_per_label) {
      std::string text;
      for (std::size_t t = 0; t < spec.text_len; ++t) {
        if (!text.empty()) text += ' ';
        if (util::uniform01(rng) < spec.noise_rate) {
          text += task.shared[util::uniform_index(rng, task.shared.size())];
        } else {
          text += sig[util::uniform_index(rng, sig.size())];
        }
      }
      if (seen.insert(text).second) {
        records.push_back({std::move(text), task.labels[l]});
      } else {
        ++misses;
      }
    }
  }
  task.dataset = make_dataset("synthetic-" + std::to_string(seed), std::move(records));
  return task;
}

}  // namespace exnet::data
