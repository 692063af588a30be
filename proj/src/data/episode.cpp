#include "exnet/data/episode.hpp"

#include <algorithm>

#include "exnet/error.hpp"
#include "exnet/util/hash.hpp"
#include "json.hpp"

namespace exnet::data {

using nlohmann::json;

bool Episode::truncated() const {
  return query.truncated ||
         std::any_of(supports.begin(), supports.end(), [](const auto& s) { return s.truncated; });
}

Episode make_episode(std::string query_text, std::string label,
                     std::vector<std::string> support_texts, int target,
                     const text::Vocab& vocab, std::size_t max_len) {
  if (support_texts.empty()) throw ValidationError("support", "at least one support text is required");
  Episode ep;
  ep.query = text::encode_prompt(vocab, text::render_template(query_text, label), max_len);
  ep.supports.reserve(support_texts.size());
  for (const auto& s : support_texts) {
    ep.supports.push_back(text::encode_prompt(vocab, text::render_template(s, label), max_len));
  }
  ep.query_text = std::move(query_text);
  ep.label = std::move(label);
  ep.support_texts = std::move(support_texts);
  ep.target = target;
  return ep;
}

std::optional<Episode> make_training_episode(const BinaryInstance& inst, const SupportPool& pool,
                                             std::size_t k, util::Rng& rng,
                                             const text::Vocab& vocab, std::size_t max_len) {
  if (k == 0) throw ValidationError("k", "K must be at least 1");
  auto it = pool.find(inst.label);
  if (it == pool.end()) return std::nullopt;
  std::vector<const std::string*> eligible;
  for (const auto& t : it->second) {
    if (t != inst.text) eligible.push_back(&t);
  }
  if (eligible.size() < k) return std::nullopt;
  std::vector<std::string> supports;
  for (auto i : util::sample_without_replacement(rng, eligible.size(), k)) {
    supports.push_back(*eligible[i]);
  }
  return make_episode(inst.text, inst.label, std::move(supports),
                      inst.answer == Answer::kYes ? 1 : 0, vocab, max_len);
}

std::vector<std::string> fixed_support_set(const SupportPool& pool, const std::string& label,
                                           std::size_t k, std::uint64_t seed) {
  auto it = pool.find(label);
  const std::size_t available = it == pool.end() ? 0 : it->second.size();
  if (available < k) {
    throw ValidationError("k", "label '" + label + "' has " + std::to_string(available) +
                                   " support candidates, K=" + std::to_string(k));
  }
  util::Rng rng(util::mix_seed(seed ^ util::mix_seed(util::fnv1a64(label)) ^
                               util::mix_seed(0x4B00 + k)));
  std::vector<std::string> out;
  for (auto i : util::sample_without_replacement(rng, available, k)) out.push_back(it->second[i]);
  return out;
}

EvalEpisodes make_eval_episodes(const MultiClassDataset& ds, const MultiClassDataset& pool_source,
                                std::size_t k, std::uint64_t seed, const text::Vocab& vocab,
                                std::size_t max_len) {
  if (k == 0) throw ValidationError("k", "K must be at least 1");
  const auto pool = build_support_pool(pool_source);
  std::vector<std::string> short_labels;
  for (const auto& label : ds.label_set) {
    auto it = pool.find(label);
    const std::size_t n = it == pool.end() ? 0 : it->second.size();
    if (n < k) short_labels.push_back(label + " (" + std::to_string(n) + ")");
  }
  if (!short_labels.empty()) {
    std::string names;
    for (const auto& l : short_labels) names += (names.empty() ? "" : ", ") + l;
    throw ValidationError("k", "fewer than K=" + std::to_string(k) +
                                   " support candidates for label(s): " + names);
  }

  EvalEpisodes out;
  out.k = k;
  for (const auto& label : ds.label_set) {
    out.fixed_supports[label] = fixed_support_set(pool, label, k, seed);
  }
  for (const auto& inst : binarize(ds, seed)) {
    const auto& supports = out.fixed_supports.at(inst.label);
    if (std::find(supports.begin(), supports.end(), inst.text) != supports.end()) {
      ++out.dropped_collisions;
      continue;
    }
    out.episodes.push_back(make_episode(inst.text, inst.label, supports,
                                        inst.answer == Answer::kYes ? 1 : 0, vocab, max_len));
  }
  return out;
}

std::string support_set_hash(const std::vector<std::string>& supports) {
  std::string joined;
  for (const auto& s : supports) {
    joined += std::to_string(s.size());
    joined += ':';
    joined += s;
  }
  return util::sha256_hex(joined);
}

std::string episodes_to_jsonl(const std::vector<Episode>& episodes) {
  std::string out;
  for (const auto& ep : episodes) {
    json j;
    j["query_text"] = ep.query_text;
    j["label"] = ep.label;
    j["support_texts"] = ep.support_texts;
    j["target"] = ep.target;
    j["k"] = ep.k();
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Episode> parse_episodes_jsonl(std::string_view content, const text::Vocab& vocab,
                                          std::size_t max_len) {
  std::vector<Episode> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      auto j = json::parse(line);
      auto supports = j.at("support_texts").get<std::vector<std::string>>();
      const int target = j.at("target").get<int>();
      if (target != 0 && target != 1) throw DataError("\"target\" must be 0 or 1", line_no);
      if (j.contains("k") && j["k"].get<std::size_t>() != supports.size()) {
        throw DataError("\"k\" disagrees with support_texts length", line_no);
      }
      out.push_back(make_episode(j.at("query_text").get<std::string>(),
                                 j.at("label").get<std::string>(), std::move(supports), target,
                                 vocab, max_len));
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed episode: ") + e.what(), line_no);
    } catch (const ValidationError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return out;
}

EpisodeStream::EpisodeStream(std::vector<EpisodeTask> tasks, std::size_t k_min, std::size_t k_max,
                             const text::Vocab& vocab, std::size_t max_len)
    : tasks_(std::move(tasks)), k_min_(k_min), k_max_(k_max), vocab_(vocab), max_len_(max_len) {
  std::erase_if(tasks_, [](const EpisodeTask& t) { return t.instances.empty(); });
  if (tasks_.empty()) throw ValidationError("episodes", "no training instances");
  if (k_min_ < 1 || k_max_ < k_min_) {
    throw ValidationError("k_range", "need 1 <= k_min <= k_max, got [" + std::to_string(k_min_) +
                                         ", " + std::to_string(k_max_) + "]");
  }
}

Episode EpisodeStream::next(util::Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const auto& task = tasks_[util::uniform_index(rng, tasks_.size())];
    const auto& inst = task.instances[util::uniform_index(rng, task.instances.size())];
    const std::size_t k = k_min_ + util::uniform_index(rng, k_max_ - k_min_ + 1);
    for (std::size_t kk = k; kk >= 1; --kk) {
      if (auto ep = make_training_episode(inst, task.pool, kk, rng, vocab_, max_len_)) {
        if (kk < k) ++reduced_k_;
        return std::move(*ep);
      }
    }
    ++skipped_;
  }
  throw DataError("no instance can supply even one support example");
}

}  // namespace exnet::data
