#include "exnet/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "exnet/error.hpp"
#include "exnet/util/random.hpp"
#include "json.hpp"

namespace exnet::data {

using nlohmann::json;

namespace {

std::string field_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field \"") + key + "\"", line);
  if (!it->is_string()) throw DataError(std::string("field \"") + key + "\" must be a string", line);
  return it->get<std::string>();
}

template <typename F>
void for_each_line(std::string_view content, F&& f) {
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw DataError("expected a JSON object", line_no);
    f(obj, line_no);
  }
}

}  // namespace

std::map<std::string, std::size_t> MultiClassDataset::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.label];
  return counts;
}

MultiClassDataset make_dataset(std::string name, std::vector<Record> records) {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].text.empty()) throw DataError("empty text in record " + std::to_string(i + 1));
    if (records[i].label.empty()) throw DataError("empty label in record " + std::to_string(i + 1));
    labels.insert(records[i].label);
  }
  return {std::move(name), std::move(records), {labels.begin(), labels.end()}};
}

MultiClassDataset parse_jsonl(std::string_view content, std::string name) {
  std::vector<Record> records;
  for_each_line(content, [&](const json& obj, std::size_t line) {
    Record r{field_string(obj, "text", line), field_string(obj, "label", line)};
    if (r.text.empty()) throw DataError("empty \"text\"", line);
    if (r.label.find_first_not_of(" \t") == std::string::npos) throw DataError("blank \"label\"", line);
    records.push_back(std::move(r));
  });
  if (records.empty()) throw DataError("dataset '" + name + "' has no records");
  return make_dataset(std::move(name), std::move(records));
}

MultiClassDataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_jsonl(buf.str(), path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string to_jsonl(const MultiClassDataset& ds) {
  std::string out;
  for (const auto& r : ds.records) {
    out += json{{"text", r.text}, {"label", r.label}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<BinaryInstance> binarize(const MultiClassDataset& ds, std::uint64_t seed) {
  if (ds.label_set.size() < 2) {
    throw ValidationError("label_set", "dataset '" + ds.name + "' needs at least 2 labels, has " +
                                           std::to_string(ds.label_set.size()));
  }
  util::Rng rng(seed);
  std::vector<BinaryInstance> out;
  out.reserve(2 * ds.records.size());
  for (const auto& r : ds.records) {
    out.push_back({r.text, r.label, Answer::kYes});
    const auto gold = std::lower_bound(ds.label_set.begin(), ds.label_set.end(), r.label) -
                      ds.label_set.begin();
    auto pick = util::uniform_index(rng, ds.label_set.size() - 1);
    if (pick >= static_cast<std::size_t>(gold)) ++pick;
    out.push_back({r.text, ds.label_set[pick], Answer::kNo});
  }
  return out;
}

std::string instances_to_jsonl(const std::vector<BinaryInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += json{{"text", inst.text},
                {"label", inst.label},
                {"answer", inst.answer == Answer::kYes ? "yes" : "no"}}
               .dump();
    out += '\n';
  }
  return out;
}

std::vector<BinaryInstance> parse_instances_jsonl(std::string_view content) {
  std::vector<BinaryInstance> out;
  for_each_line(content, [&](const json& obj, std::size_t line) {
    const auto answer = field_string(obj, "answer", line);
    if (answer != "yes" && answer != "no") throw DataError("\"answer\" must be yes or no", line);
    out.push_back({field_string(obj, "text", line), field_string(obj, "label", line),
                   answer == "yes" ? Answer::kYes : Answer::kNo});
  });
  return out;
}

SupportPool build_support_pool(const MultiClassDataset& ds) {
  SupportPool pool;
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& r : ds.records) {
    if (seen[r.label].insert(r.text).second) pool[r.label].push_back(r.text);
  }
  return pool;
}

std::pair<MultiClassDataset, MultiClassDataset> split_by_label(const MultiClassDataset& ds,
                                                                std::size_t holdout_every) {
  if (holdout_every < 2) throw ValidationError("holdout_every", "must be at least 2");
  std::map<std::string, std::size_t> position;
  std::vector<Record> keep, held;
  for (const auto& r : ds.records) {
    const auto n = position[r.label]++;
    ((n % holdout_every) == holdout_every - 1 ? held : keep).push_back(r);
  }
  return {make_dataset(ds.name, std::move(keep)), make_dataset(ds.name + "-pool", std::move(held))};
}

}  // namespace exnet::data
