#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exnet/data/dataset.hpp"

namespace exnet::data {

struct SyntheticSpec {
  std::size_t n_labels = 8;
  std::size_t vocab_per_label = 4;
  std::size_t shared_vocab = 20;
  std::size_t texts_per_label = 40;
  std::size_t text_len = 6;
  double noise_rate = 0.0;
  // Signature words are drawn from w0..w{word_pool-1}. 0 means exactly
  // n_labels * vocab_per_label words, so every task uses the same words but
  // assigns them to labels differently per seed.
  std::size_t word_pool = 0;
};

struct SyntheticTask {
  MultiClassDataset dataset;
  std::vector<std::vector<std::string>> signatures;  // per label, in label order
  std::vector<std::string> labels;                   // labels[i] owns signatures[i]
  std::vector<std::string> shared;
};

// Each label owns a disjoint set of signature words and is named after the
// first of them. A text token is a shared word with probability noise_rate,
// otherwise one of its label's signature words. Texts are unique within a
// label; generation stops after texts_per_label texts or when repeated draws
// keep colliding.
SyntheticTask gen_synthetic_task(const SyntheticSpec& spec, std::uint64_t seed);

// Words used by tasks built from `spec`, for vocabulary construction.
std::vector<std::string> synthetic_words(const SyntheticSpec& spec);

}  // namespace exnet::data
