#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exnet/data/dataset.hpp"
#include "exnet/text/tokenizer.hpp"
#include "exnet/util/random.hpp"

namespace exnet::data {

struct Episode {
  std::string query_text;
  std::string label;
  std::vector<std::string> support_texts;
  int target = 0;

  text::TokenSequence query;
  std::vector<text::TokenSequence> supports;

  std::size_t k() const noexcept { return support_texts.size(); }
  bool truncated() const;
};

// Renders query and supports with T(., label) and encodes them.
Episode make_episode(std::string query_text, std::string label,
                     std::vector<std::string> support_texts, int target,
                     const text::Vocab& vocab, std::size_t max_len);

// K supports drawn without replacement from pool[inst.label] minus the query
// text. Returns nullopt when fewer than K eligible texts remain.
std::optional<Episode> make_training_episode(const BinaryInstance& inst, const SupportPool& pool,
                                             std::size_t k, util::Rng& rng,
                                             const text::Vocab& vocab, std::size_t max_len);

struct EvalEpisodes {
  std::size_t k = 0;
  std::vector<Episode> episodes;
  std::size_t dropped_collisions = 0;
  std::map<std::string, std::vector<std::string>> fixed_supports;
};

// The K-support set used for `label` in a run with this (seed, K).
std::vector<std::string> fixed_support_set(const SupportPool& pool, const std::string& label,
                                           std::size_t k, std::uint64_t seed);

// Queries are binarize(ds, seed); each label's support set is drawn once from
// pool_source and shared by every query asking about that label. A query
// whose text is among its label's supports is dropped and counted. Throws
// ValidationError("k") listing every label with fewer than K candidates.
EvalEpisodes make_eval_episodes(const MultiClassDataset& ds, const MultiClassDataset& pool_source,
                                std::size_t k, std::uint64_t seed, const text::Vocab& vocab,
                                std::size_t max_len);

// SHA-256 over the support texts in order.
std::string support_set_hash(const std::vector<std::string>& supports);

// {query_text, label, support_texts, target, k} per line.
std::string episodes_to_jsonl(const std::vector<Episode>& episodes);
std::vector<Episode> parse_episodes_jsonl(std::string_view content, const text::Vocab& vocab,
                                          std::size_t max_len);

// A binarized dataset paired with the positives its supports come from.
struct EpisodeTask {
  std::vector<BinaryInstance> instances;
  SupportPool pool;
};

// Infinite stream of training episodes: task uniform, instance uniform, K
// uniform in [k_min, k_max]. When an instance cannot supply K supports, K is
// lowered towards 1 before another instance is drawn.
class EpisodeStream {
 public:
  EpisodeStream(std::vector<EpisodeTask> tasks, std::size_t k_min, std::size_t k_max,
                const text::Vocab& vocab, std::size_t max_len);

  Episode next(util::Rng& rng);
  std::size_t skipped() const noexcept { return skipped_; }
  std::size_t reduced_k() const noexcept { return reduced_k_; }

 private:
  std::vector<EpisodeTask> tasks_;
  std::size_t k_min_;
  std::size_t k_max_;
  const text::Vocab& vocab_;
  std::size_t max_len_;
  std::size_t skipped_ = 0;
  std::size_t reduced_k_ = 0;
};

}  // namespace exnet::data
