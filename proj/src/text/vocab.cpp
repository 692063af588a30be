#include "exnet/text/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "exnet/error.hpp"
#include "exnet/text/tokenizer.hpp"
#include "exnet/util/hash.hpp"

namespace exnet::text {

namespace {

bool is_special(std::string_view t) {
  return t == kPadToken || t == kUnkToken || t == kClsToken || t == kSepToken;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const std::string_view specials[] = {kPadToken, kUnkToken, kClsToken, kSepToken};
  if (tokens_.size() < kNumSpecials) {
    throw DataError("vocabulary needs at least " + std::to_string(kNumSpecials) + " entries");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (i < kNumSpecials && t != specials[i]) {
      throw DataError("expected special token " + std::string(specials[i]) + ", got '" + t + "'",
                      i + 1);
    }
    if (i >= kNumSpecials && is_special(t)) {
      throw DataError("special token '" + t + "' outside reserved ids", i + 1);
    }
    if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError("vocabulary token is empty or contains whitespace", i + 1);
    }
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw DataError("duplicate vocabulary token '" + t + "'", i + 1);
    }
  }
}

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ValidationError("id", "token id " + std::to_string(id) + " outside vocabulary of size " +
                                    std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::string Vocab::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocab Vocab::parse(std::string_view content) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string line(content.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
    pos = end + 1;
  }
  return Vocab(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary to " + path.string());
  out << serialize();
  if (!out) throw Error("failed writing vocabulary to " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Vocab::hash() const { return util::sha256_hex(serialize()); }

Vocab build_vocab(std::span<const std::string> corpus, std::size_t target_size) {
  const std::size_t n_literals = std::size(kTemplateLiterals);
  if (target_size < kNumSpecials + n_literals) {
    throw ValidationError("target_size", "must be at least " +
                                             std::to_string(kNumSpecials + n_literals) + ", got " +
                                             std::to_string(target_size));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (auto& tok : tokenize(doc)) {
      if (!is_special(tok)) ++counts[std::move(tok)];
    }
  }
  if (counts.empty()) throw ValidationError("corpus", "no tokens to build a vocabulary from");

  auto by_rank = [&](const std::string& a, const std::string& b) {
    const auto ca = counts.count(a) ? counts.at(a) : 0;
    const auto cb = counts.count(b) ? counts.at(b) : 0;
    return ca != cb ? ca > cb : a < b;
  };

  std::vector<std::string> chosen(std::begin(kTemplateLiterals), std::end(kTemplateLiterals));
  std::vector<std::string> others;
  for (const auto& [tok, _] : counts) {
    if (std::find(chosen.begin(), chosen.end(), tok) == chosen.end()) others.push_back(tok);
  }
  std::sort(others.begin(), others.end(), by_rank);
  const std::size_t budget = target_size - kNumSpecials - n_literals;
  if (others.size() > budget) others.resize(budget);
  chosen.insert(chosen.end(), others.begin(), others.end());
  std::sort(chosen.begin(), chosen.end(), by_rank);

  std::vector<std::string> tokens{std::string(kPadToken), std::string(kUnkToken),
                                  std::string(kClsToken), std::string(kSepToken)};
  tokens.insert(tokens.end(), chosen.begin(), chosen.end());
  return Vocab(std::move(tokens));
}

}  // namespace exnet::text
