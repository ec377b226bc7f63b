#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "graphfilter/corpus.hpp"
#include "support/corpora.hpp"

namespace gf = graphfilter;
using gf::NGram;
using gf::Token;

namespace {

std::vector<Token> toks(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST(Tokenize, SplitsPunctuationAndLowercases) {
  EXPECT_EQ(gf::tokenize("Hello, world!"), toks({"hello", ",", "world", "!"}));
  EXPECT_TRUE(gf::tokenize("").empty());
  EXPECT_EQ(gf::tokenize("A  A"), toks({"a", "a"}));
}

TEST(Tokenize, UnicodeCaseAndSpace) {
  // "ÉCOLE" with a no-break space and Greek capitals.
  EXPECT_EQ(gf::tokenize("\xC3\x89" "COLE\xC2\xA0" "\xCE\x91\xCE\x92"),
            toks({"\xC3\xA9" "cole", "\xCE\xB1\xCE\xB2"}));
  // Em dash is punctuation.
  EXPECT_EQ(gf::tokenize("a\xE2\x80\x94" "b"), toks({"a", "\xE2\x80\x94", "b"}));
}

TEST(Tokenize, PolicyVariants) {
  EXPECT_EQ(gf::tokenize("Don't stop.", gf::TokenizerPolicy::whitespace()), toks({"don't", "stop."}));
  EXPECT_EQ(gf::tokenize("Don't stop.", gf::TokenizerPolicy::words()), toks({"don", "t", "stop"}));
  gf::TokenizerPolicy keep_case;
  keep_case.lowercase = false;
  EXPECT_EQ(gf::tokenize("Hi there", keep_case), toks({"Hi", "there"}));
}

TEST(Tokenize, TokensAreNonEmptyWithoutWhitespace) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "aB ,.\t\n!?xY'\"-";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const auto len = gf::testing::below(rng, 40);
    for (std::size_t i = 0; i < len; ++i) text += alphabet[gf::testing::below(rng, alphabet.size())];
    const auto tokens = gf::tokenize(text);
    EXPECT_EQ(tokens, gf::tokenize(text));
    for (const auto& t : tokens) {
      ASSERT_FALSE(t.empty());
      EXPECT_EQ(t.find_first_of(" \t\n"), std::string::npos) << t;
    }
  }
}

TEST(ExtractNGrams, CountsWindows) {
  const auto counts = gf::extract_ngrams(toks({"a", "b", "a"}), {1, 2});
  const std::map<NGram, std::size_t> expected = {
      {NGram{"a"}, 2}, {NGram{"b"}, 1}, {NGram{"a", "b"}, 1}, {NGram{"b", "a"}, 1}};
  EXPECT_EQ(counts, expected);

  EXPECT_TRUE(gf::extract_ngrams(toks({"a"}), {2, 3}).empty());

  const auto tri = gf::extract_ngrams(toks({"a", "b", "c"}), {3});
  ASSERT_EQ(tri.size(), 1u);
  EXPECT_EQ(tri.begin()->first, (NGram{"a", "b", "c"}));
  EXPECT_EQ(tri.begin()->second, 1u);
}

TEST(ExtractNGrams, RejectsBadOrders) {
  EXPECT_THROW(gf::extract_ngrams(toks({"a"}), {0}), gf::Error);
  EXPECT_THROW(gf::extract_ngrams(toks({"a"}), {4}), gf::Error);
  EXPECT_THROW(NGram(std::vector<Token>{}), gf::Error);
}

TEST(ExtractNGrams, CountConservation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Token> tokens;
    const auto len = gf::testing::below(rng, 12);
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(std::string(1, static_cast<char>('a' + gf::testing::below(rng, 3))));
    const auto counts = gf::extract_ngrams(tokens, {1, 2, 3});
    for (int n = 1; n <= 3; ++n) {
      std::size_t total = 0;
      for (const auto& [ngram, c] : counts) {
        if (ngram.order() == n) total += c;
      }
      const std::size_t expected = len >= static_cast<std::size_t>(n) ? len - n + 1 : 0;
      EXPECT_EQ(total, expected);
    }
  }
}

TEST(ExtractNGrams, SharedPhrasesUnify) {
  const auto a = gf::extract_ngrams(gf::tokenize("the quick fox"), {2});
  const auto b = gf::extract_ngrams(gf::tokenize("a quick fox runs"), {2});
  EXPECT_TRUE(a.contains(NGram{"quick", "fox"}));
  EXPECT_TRUE(b.contains(NGram{"quick", "fox"}));
}

TEST(SelectContent, Sides) {
  gf::TrainingInstance inst{0, "x", "y", ""};
  EXPECT_EQ(gf::select_content(inst, gf::ContentSide::instruction), "x");
  EXPECT_EQ(gf::select_content(inst, gf::ContentSide::response), "y");

  gf::TrainingInstance pair{0, "p q", "r s", ""};
  const auto both = gf::extract_ngrams(
      gf::tokenize(gf::select_content(pair, gf::ContentSide::both)), {1, 2, 3});
  auto expected = gf::extract_ngrams(gf::tokenize("p q"), {1, 2, 3});
  for (const auto& [k, c] : gf::extract_ngrams(gf::tokenize("r s"), {1, 2, 3})) expected[k] += c;
  EXPECT_EQ(both, expected);
  EXPECT_FALSE(both.contains(NGram{"q", "r"}));
}

TEST(LoadDataset, ReadsRecordsInOrder) {
  const auto instances = gf::load_dataset_from_string(
      "{\"instruction\":\"a\",\"response\":\"b\"}\n{\"instruction\":\"c\",\"output\":\"d\"}\n");
  ASSERT_EQ(instances.size(), 2u);
  EXPECT_EQ(instances[0].id, 0u);
  EXPECT_EQ(instances[1].id, 1u);
  EXPECT_EQ(instances[1].response, "d");
  EXPECT_EQ(instances[0].raw, "{\"instruction\":\"a\",\"response\":\"b\"}");
}

TEST(LoadDataset, EmptyInput) { EXPECT_TRUE(gf::load_dataset_from_string("").empty()); }

namespace {

std::string load_error(const std::string& text) {
  try {
    gf::load_dataset_from_string(text);
  } catch (const gf::Error& e) {
    EXPECT_EQ(e.kind(), gf::ErrorKind::input);
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST(LoadDataset, ErrorsNameTheLine) {
  EXPECT_NE(load_error("{\"response\":\"b\"}\n").find("line 1"), std::string::npos);
  EXPECT_NE(load_error("{\"instruction\":\"a\",\"response\":\"b\"}\n\n{\"instruction\":\"x\"}\n")
                .find("line 3"),
            std::string::npos);
  EXPECT_NE(load_error("{\"instruction\":\"a\",\"response\":\"b\"}\n{\"instruction\":\"\xff\",\"response\":\"\"}\n")
                .find("line 2: invalid UTF-8"),
            std::string::npos);
  EXPECT_NE(load_error("{\"instruction\":\"   \",\"response\":\"b\"}\n").find("empty instruction"),
            std::string::npos);
  EXPECT_NE(load_error("not json\n").find("line 1"), std::string::npos);
  EXPECT_NE(load_error("{\"instruction\":3,\"response\":\"b\"}\n").find("not a string"), std::string::npos);
}

TEST(LoadDataset, EmptyResponseAllowed) {
  const auto instances = gf::load_dataset_from_string("{\"instruction\":\"a\",\"response\":\"\"}\n");
  ASSERT_EQ(instances.size(), 1u);
  EXPECT_TRUE(instances[0].response.empty());
}

TEST(LoadDataset, MissingFile) {
  EXPECT_THROW(gf::load_dataset("/nonexistent/data.jsonl"), gf::Error);
}
