#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace exnet::data {

struct Record {
  std::string text;
  std::string label;
  bool operator==(const Record&) const = default;
};

struct MultiClassDataset {
  std::string name;
  std::vector<Record> records;
  std::vector<std::string> label_set;  // sorted, unique

  std::map<std::string, std::size_t> label_counts() const;
};

// Builds label_set from the records. Throws DataError on an empty text or
// label.
MultiClassDataset make_dataset(std::string name, std::vector<Record> records);

// One {"text": ..., "label": ...} object per line; blank lines are skipped.
// Errors carry the 1-based line number.
MultiClassDataset parse_jsonl(std::string_view content, std::string name);
MultiClassDataset load_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const MultiClassDataset& ds);

enum class Answer { kNo = 0, kYes = 1 };

struct BinaryInstance {
  std::string text;
  std::string label;  // the label asked about
  Answer answer = Answer::kNo;
  bool operator==(const BinaryInstance&) const = default;
};

// For every record, in order: its yes-instance followed by one no-instance
// whose label is drawn uniformly from the other labels. Throws
// ValidationError("label_set") for fewer than two labels.
std::vector<BinaryInstance> binarize(const MultiClassDataset& ds, std::uint64_t seed);

std::string instances_to_jsonl(const std::vector<BinaryInstance>& instances);
std::vector<BinaryInstance> parse_instances_jsonl(std::string_view content);

// label -> deduplicated positive texts, first-seen order.
using SupportPool = std::map<std::string, std::vector<std::string>>;

SupportPool build_support_pool(const MultiClassDataset& ds);

// Deterministic split: every `holdout_every`-th record of each label (by
// position within the label) goes to the second dataset.
std::pair<MultiClassDataset, MultiClassDataset> split_by_label(const MultiClassDataset& ds,
                                                                std::size_t holdout_every);

}  // namespace exnet::data
