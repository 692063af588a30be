#include "exnet/text/tokenizer.hpp"

#include <algorithm>
#include <cctype>

#include "exnet/error.hpp"

namespace exnet::text {

namespace {

bool ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

char lower(unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); }

// Case-insensitive match of a bracketed literal at position i.
bool literal_at(std::string_view s, std::size_t i, std::string_view lit) {
  if (s.size() - i < lit.size()) return false;
  for (std::size_t j = 0; j < lit.size(); ++j) {
    if (lower(s[i + j]) != lower(lit[j])) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == '[') {
      bool matched = false;
      for (auto lit : {kSepToken, kUnkToken}) {
        if (literal_at(s, i, lit)) {
          flush();
          out.emplace_back(lit);
          i += lit.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (ascii_space(c)) {
      flush();
    } else if (ascii_punct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      word.push_back(lower(c));
    }
    ++i;
  }
  flush();
  return out;
}

std::string render_template(std::string_view x, std::string_view l) {
  const bool blank = std::all_of(l.begin(), l.end(), [](char c) { return ascii_space(c); });
  if (blank) throw ValidationError("label", "label must not be blank");
  std::string out = "question: is the text about ";
  out += l;
  out += "? [SEP] text: ";
  out += x;
  return out;
}

std::size_t TokenSequence::length() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

TokenSequence encode_prompt(const Vocab& vocab, std::string_view rendered, std::size_t max_len) {
  if (max_len < 3) {
    throw ValidationError("max_len", "must be at least 3, got " + std::to_string(max_len));
  }
  TokenSequence seq;
  seq.ids.assign(max_len, kPad);
  seq.mask.assign(max_len, 0);
  seq.ids[0] = kCls;
  seq.mask[0] = 1;
  const auto tokens = tokenize(rendered);
  const std::size_t kept = std::min(tokens.size(), max_len - 1);
  seq.truncated = tokens.size() > kept;
  for (std::size_t i = 0; i < kept; ++i) {
    seq.ids[i + 1] = tokens[i] == kSepToken ? kSep : vocab.id(tokens[i]);
    seq.mask[i + 1] = 1;
  }
  return seq;
}

std::string decode(const Vocab& vocab, const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 1; i < seq.ids.size() && seq.ids[i] != kPad; ++i) {
    if (!out.empty()) out += ' ';
    out += vocab.token(seq.ids[i]);
  }
  return out;
}

}  // namespace exnet::text
