#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exnet/data/episode.hpp"
#include "exnet/model/exnet.hpp"
#include "json.hpp"

namespace exnet::training {

struct EvalEntry {
  std::size_t k = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  std::size_t n_episodes = 0;
  std::size_t dropped_collisions = 0;
};

struct EvalReport {
  std::string dataset;
  std::vector<EvalEntry> entries;  // one per K
  std::string model_id;
  std::uint64_t seed = 0;
  std::string timestamp;
};

// Eval-mode forward over episodes sharing one K; "yes" iff p >= threshold.
// Throws ValidationError for an empty list or mixed K, and Error if two
// episodes asking about the same label carry different support sets.
EvalEntry evaluate(const model::ExnetModel<float>& model, std::span<const data::Episode> episodes,
                   double threshold = 0.5);
// Same, with probabilities already computed.
EvalEntry evaluate_probabilities(std::span<const data::Episode> episodes,
                                 std::span<const float> probabilities, double threshold = 0.5);

// UTC ISO-8601 time taken from SOURCE_DATE_EPOCH, or the epoch when unset, so
// reruns produce identical reports.
std::string report_timestamp();

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

// Aligned table with columns Dataset, K, F1, P, R, n, dropped; one row per
// (report, entry).
std::string render_table(std::span<const EvalReport> reports);

}  // namespace exnet::training
