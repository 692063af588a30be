#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace exnet::text {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kCls = 2;
inline constexpr TokenId kSep = 3;
inline constexpr std::size_t kNumSpecials = 4;

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";

// Words of the prompt template; build_vocab always keeps them.
inline constexpr std::string_view kTemplateLiterals[] = {"question", "is",  "the", "text",
                                                         "about",    "?",   ":"};

// Word-level vocabulary. Ids 0..3 are PAD, UNK, CLS, SEP; every other token
// maps to a unique id. Immutable once built.
class Vocab {
 public:
  // `tokens` in id order, specials first. Throws DataError on duplicates or
  // misplaced specials.
  explicit Vocab(std::vector<std::string> tokens);

  // Unknown tokens map to kUnk.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // One token per line, line index = id.
  std::string serialize() const;
  static Vocab parse(std::string_view content);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  // SHA-256 of serialize(); checkpoints record it to detect mismatched vocabularies.
  std::string hash() const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Frequency-ranked vocabulary of at most `target_size` entries (specials
// included). Equal counts are ordered lexicographically. Template literals
// are always present. Throws ValidationError when the corpus has no tokens
// or target_size cannot hold specials plus template literals.
Vocab build_vocab(std::span<const std::string> corpus, std::size_t target_size);

}  // namespace exnet::text
