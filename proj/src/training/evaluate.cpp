#include "exnet/training/evaluate.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <map>

#include "exnet/error.hpp"
#include "exnet/training/metrics.hpp"

namespace exnet::training {

using nlohmann::json;

EvalEntry evaluate_probabilities(std::span<const data::Episode> episodes,
                                 std::span<const float> probabilities, double threshold) {
  if (episodes.empty()) throw ValidationError("episodes", "evaluation set is empty");
  if (probabilities.size() != episodes.size()) {
    throw ValidationError("probabilities", "one probability per episode required");
  }
  const std::size_t k = episodes.front().k();
  std::map<std::string, std::string> support_hash;
  std::vector<int> preds, golds;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& ep = episodes[i];
    if (ep.k() != k) {
      throw ValidationError("episodes", "mixed K: episode " + std::to_string(i) + " has K=" +
                                            std::to_string(ep.k()) + ", expected " +
                                            std::to_string(k));
    }
    const auto hash = data::support_set_hash(ep.support_texts);
    auto [it, inserted] = support_hash.emplace(ep.label, hash);
    if (!inserted && it->second != hash) {
      throw Error("episodes for label '" + ep.label + "' do not share one support set");
    }
    preds.push_back(probabilities[i] >= threshold ? 1 : 0);
    golds.push_back(ep.target);
  }
  const auto f = f1_score(preds, golds);
  return EvalEntry{k, f.f1, f.precision, f.recall, episodes.size(), 0};
}

EvalEntry evaluate(const model::ExnetModel<float>& model, std::span<const data::Episode> episodes,
                   double threshold) {
  if (episodes.empty()) throw ValidationError("episodes", "evaluation set is empty");
  const auto probs = model.predict(episodes);
  return evaluate_probabilities(episodes, probs, threshold);
}

std::string report_timestamp() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const EvalReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"k", e.k},
                       {"f1", e.f1},
                       {"precision", e.precision},
                       {"recall", e.recall},
                       {"n_episodes", e.n_episodes},
                       {"dropped_collisions", e.dropped_collisions}});
  }
  return json{{"dataset", report.dataset},
              {"entries", entries},
              {"model_id", report.model_id},
              {"seed", report.seed},
              {"timestamp", report.timestamp}};
}

EvalReport eval_report_from_json(const json& j) {
  try {
    EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("k").get<std::size_t>(), e.at("f1").get<double>(),
                           e.at("precision").get<double>(), e.at("recall").get<double>(),
                           e.at("n_episodes").get<std::size_t>(),
                           e.at("dropped_collisions").get<std::size_t>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError("report", e.what());
  }
}

std::string render_table(std::span<const EvalReport> reports) {
  std::vector<std::vector<std::string>> rows{{"Dataset", "K", "F1", "P", "R", "n", "dropped"}};
  char buf[32];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  for (const auto& r : reports) {
    for (const auto& e : r.entries) {
      rows.push_back({r.dataset, std::to_string(e.k), fmt(e.f1), fmt(e.precision), fmt(e.recall),
                      std::to_string(e.n_episodes), std::to_string(e.dropped_collisions)});
    }
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const auto& cell = rows[r][c];
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? cell + pad : pad + cell;  // dataset left, numbers right
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

}  // namespace exnet::training
