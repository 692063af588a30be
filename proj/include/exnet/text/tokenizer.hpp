#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "exnet/text/vocab.hpp"

namespace exnet::text {

// Lowercases ASCII letters, splits on whitespace and emits each ASCII
// punctuation character as its own token. The literals "[SEP]" and "[UNK]"
// (any case) survive as single tokens. Non-ASCII bytes are word characters.
std::vector<std::string> tokenize(std::string_view s);

// `question: is the text about {l}? [SEP] text: {x}`. Throws
// ValidationError("label") for a blank label.
std::string render_template(std::string_view x, std::string_view l);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> mask;  // 1 on real tokens, 0 on PAD
  bool truncated = false;

  std::size_t length() const noexcept;  // count of real tokens
  bool operator==(const TokenSequence&) const = default;
};

// [CLS] + token ids, cut to max_len - 1 content tokens, padded to max_len.
// Throws ValidationError("max_len") when max_len < 3.
TokenSequence encode_prompt(const Vocab& vocab, std::string_view rendered, std::size_t max_len);

// Space-joined tokens after CLS, stopping at the first PAD.
std::string decode(const Vocab& vocab, const TokenSequence& seq);

}  // namespace exnet::text
