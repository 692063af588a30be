#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "exnet/error.hpp"
#include "exnet/text/tokenizer.hpp"
#include "exnet/text/vocab.hpp"

namespace exnet::text {
namespace {

Vocab small_vocab() {
  std::vector<std::string> corpus{"great shoes", "question: is the text about positive? text:"};
  return build_vocab(corpus, 100);
}

TEST(BuildVocab, FrequencyOrder) {
  std::vector<std::string> corpus{"a b", "a"};
  auto v = build_vocab(corpus, 100);
  EXPECT_LT(v.id("a"), v.id("b"));
  EXPECT_NE(v.id("b"), kUnk);
}

TEST(BuildVocab, Deterministic) {
  std::vector<std::string> corpus{"the cat sat", "on the mat", "a cat!"};
  EXPECT_EQ(build_vocab(corpus, 50), build_vocab(corpus, 50));
  EXPECT_EQ(build_vocab(corpus, 50).hash(), build_vocab(corpus, 50).hash());
}

TEST(BuildVocab, TiesBrokenLexicographically) {
  std::vector<std::string> corpus{"zeta alpha mid", "mid"};
  auto v = build_vocab(corpus, 100);
  EXPECT_LT(v.id("mid"), v.id("alpha"));
  EXPECT_LT(v.id("alpha"), v.id("zeta"));
}

TEST(BuildVocab, SpecialsAndTemplateLiteralsReserved) {
  std::vector<std::string> corpus{"x y z x y x"};
  auto v = build_vocab(corpus, 12);
  EXPECT_EQ(v.size(), 12u);
  EXPECT_EQ(v.token(kPad), "[PAD]");
  EXPECT_EQ(v.token(kUnk), "[UNK]");
  EXPECT_EQ(v.token(kCls), "[CLS]");
  EXPECT_EQ(v.token(kSep), "[SEP]");
  for (auto lit : kTemplateLiterals) EXPECT_TRUE(v.contains(lit)) << lit;
  EXPECT_TRUE(v.contains("x"));
  EXPECT_FALSE(v.contains("y"));
}

TEST(BuildVocab, Errors) {
  std::vector<std::string> empty;
  EXPECT_THROW(build_vocab(empty, 100), ValidationError);
  std::vector<std::string> blank{"   "};
  EXPECT_THROW(build_vocab(blank, 100), ValidationError);
  std::vector<std::string> corpus{"a"};
  EXPECT_THROW(build_vocab(corpus, 10), ValidationError);
}

TEST(Vocab, FileRoundTrip) {
  auto v = small_vocab();
  auto path = std::filesystem::temp_directory_path() / "exnet_text_test_vocab.txt";
  v.save(path);
  auto loaded = Vocab::load(path);
  EXPECT_EQ(loaded, v);
  EXPECT_EQ(loaded.hash(), v.hash());
  std::filesystem::remove(path);
}

TEST(Vocab, RejectsMalformedFiles) {
  EXPECT_THROW(Vocab::parse("[PAD]\n[UNK]\n"), DataError);
  EXPECT_THROW(Vocab::parse("[PAD]\n[CLS]\n[UNK]\n[SEP]\n"), DataError);
  try {
    Vocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\nfoo\nfoo\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Hello, World!"), (std::vector<std::string>{"hello", ",", "world", "!"}));
  EXPECT_EQ(tokenize("about sports? [SEP] text: x"),
            (std::vector<std::string>{"about", "sports", "?", "[SEP]", "text", ":", "x"}));
  EXPECT_EQ(tokenize("a[unk]b"), (std::vector<std::string>{"a", "[UNK]", "b"}));
  EXPECT_EQ(tokenize("[CLS]"), (std::vector<std::string>{"[", "cls", "]"}));
  EXPECT_TRUE(tokenize(" \t\n").empty());
}

TEST(RenderTemplate, ExactBytes) {
  EXPECT_EQ(render_template("great shoes", "positive"),
            "question: is the text about positive? [SEP] text: great shoes");
  EXPECT_EQ(render_template("", "sports"), "question: is the text about sports? [SEP] text: ");
}

TEST(RenderTemplate, BlankLabelRejected) {
  try {
    render_template("x", "  ");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "label");
  }
  EXPECT_THROW(render_template("x", ""), ValidationError);
}

TEST(RenderTemplate, InjectiveOnSampledPairs) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> words{"a", "b", "ab", "?", "text:", "about", " ", "x y"};
  std::map<std::string, std::pair<std::string, std::string>> seen;
  for (int trial = 0; trial < 5000; ++trial) {
    auto pick = [&] {
      std::string s;
      const int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) s += words[rng() % words.size()];
      return s;
    };
    std::string x = pick();
    std::string l = "l" + pick();
    auto r = render_template(x, l);
    auto [it, inserted] = seen.emplace(r, std::make_pair(x, l));
    if (!inserted) {
      EXPECT_EQ(it->second, std::make_pair(x, l)) << r;
    }
  }
}

TEST(EncodePrompt, Structure) {
  auto v = small_vocab();
  auto seq = encode_prompt(v, "great [SEP] shoes", 8);
  EXPECT_EQ(seq.ids, (std::vector<TokenId>{kCls, v.id("great"), kSep, v.id("shoes"), kPad, kPad,
                                           kPad, kPad}));
  EXPECT_EQ(seq.mask, (std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 0, 0}));
  EXPECT_FALSE(seq.truncated);
  EXPECT_EQ(seq.length(), 4u);
}

TEST(EncodePrompt, UnknownWordsBecomeUnk) {
  auto v = small_vocab();
  auto seq = encode_prompt(v, "zebra quokka axolotl", 6);
  EXPECT_EQ(seq.ids, (std::vector<TokenId>{kCls, kUnk, kUnk, kUnk, kPad, kPad}));
}

TEST(EncodePrompt, Truncation) {
  auto v = small_vocab();
  auto seq = encode_prompt(v, render_template("great shoes great shoes", "positive"), 5);
  EXPECT_EQ(seq.ids.size(), 5u);
  EXPECT_EQ(seq.mask, (std::vector<std::uint8_t>{1, 1, 1, 1, 1}));
  EXPECT_TRUE(seq.truncated);
  EXPECT_THROW(encode_prompt(v, "x", 2), ValidationError);
}

TEST(EncodePrompt, MaskMatchesNonPadAndDecodeIsIdempotent) {
  auto v = small_vocab();
  std::mt19937_64 rng(8);
  const std::vector<std::string> words{"great", "shoes", "unknown", "?", "[SEP]", "text", "Zz"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const auto n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    const std::size_t max_len = 3 + rng() % 10;
    auto seq = encode_prompt(v, s, max_len);
    ASSERT_EQ(seq.ids.size(), max_len);
    EXPECT_EQ(seq.ids[0], kCls);
    std::size_t non_pad = 0;
    for (auto id : seq.ids) non_pad += id != kPad;
    EXPECT_EQ(seq.length(), non_pad);
    for (std::size_t i = 0; i < max_len; ++i) EXPECT_EQ(seq.mask[i], seq.ids[i] != kPad);
    auto again = encode_prompt(v, decode(v, seq), max_len);
    EXPECT_EQ(again.ids, seq.ids) << s;
  }
}

}  // namespace
}  // namespace exnet::text
