#pragma once

#include <random>
#include <string>
#include <vector>

#include "exnet/data/episode.hpp"
#include "exnet/model/exnet.hpp"
#include "exnet/text/vocab.hpp"

namespace exnet::testing {

inline text::Vocab fixture_vocab() {
  std::vector<std::string> corpus;
  std::string words;
  for (int i = 0; i < 24; ++i) words += "w" + std::to_string(i) + " ";
  corpus.push_back(words);
  return text::build_vocab(corpus, 64);
}

inline model::ModelConfig micro_config(std::size_t vocab_size) {
  auto cfg = model::preset_config("micro", vocab_size);
  cfg.max_len = 24;
  return cfg;
}

inline std::string random_text(std::mt19937_64& rng, std::size_t min_words = 1,
                               std::size_t max_words = 6) {
  const std::size_t n = min_words + rng() % (max_words - min_words + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.empty()) s += ' ';
    s += "w" + std::to_string(rng() % 30);  // some ids fall outside the vocabulary
  }
  return s;
}

inline data::Episode random_episode(std::mt19937_64& rng, const text::Vocab& vocab,
                                    std::size_t k, std::size_t max_len) {
  std::vector<std::string> supports;
  for (std::size_t i = 0; i < k; ++i) supports.push_back(random_text(rng));
  return data::make_episode(random_text(rng), "w" + std::to_string(rng() % 24), std::move(supports),
                            static_cast<int>(rng() % 2), vocab, max_len);
}

}  // namespace exnet::testing
