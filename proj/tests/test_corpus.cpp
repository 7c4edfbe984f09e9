#include <gtest/gtest.h>

#include <map>
#include <sstream>
#include <string>

#include "denoiser/corpus.hpp"
#include "denoiser/errors.hpp"
#include "denoiser/random.hpp"

using namespace denoiser;
using corpus::Corpus;
using corpus::CorpusIndex;

namespace {

Corpus small_corpus() {
  return Corpus::from_entries({{"bird", 120}, {"board", 300}, {"beard", 40}, {"bard", 15}, {"cat", 500},
                               {"cart", 60}, {"walking", 80}, {"talking", 90}, {"kitten", 10}});
}

std::string random_ascii(Rng& rng, std::size_t min_len, std::size_t max_len, std::string_view alphabet) {
  std::string s(min_len + rng.uniform_index(max_len - min_len + 1), 'a');
  for (auto& c : s) c = alphabet[rng.uniform_index(alphabet.size())];
  return s;
}

}  // namespace

TEST(Corpus, ParseReadsFrequencies) {
  std::istringstream in("# comment\nbird\t12\n\nBoard\t7\ncat\n");
  const auto c = corpus::parse_corpus(in);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.frequency("bird"), 12u);
  EXPECT_EQ(c.frequency("board"), 7u);
  EXPECT_EQ(c.frequency("cat"), 1u);
  EXPECT_EQ(c.frequency("dog"), 0u);
  EXPECT_EQ(c.total_frequency(), 20u);
}

TEST(Corpus, DuplicatesMerge) {
  std::istringstream in("bird\t2\nBIRD\t3\n");
  const auto c = corpus::parse_corpus(in);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.frequency("bird"), 5u);
}

TEST(Corpus, ParseErrorsCarryLineNumber) {
  std::istringstream in("bird\t2\nboard\tmany\n");
  try {
    corpus::parse_corpus(in);
    FAIL() << "expected CorpusParseError";
  } catch (const CorpusParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Corpus, EmptyIsRejected) {
  std::istringstream in("# nothing\n\n");
  EXPECT_THROW(corpus::parse_corpus(in), EmptyCorpus);
  EXPECT_THROW(Corpus::from_entries({}), EmptyCorpus);
}

TEST(Corpus, BundledLexiconLoads) {
  const auto c = corpus::load_corpus(DENOISER_DATA_DIR "/en_lexicon.tsv");
  EXPECT_GT(c.size(), 50000u);
  EXPECT_TRUE(c.find("walking").has_value());
  EXPECT_GT(c.frequency("the"), c.frequency("walking"));
}

TEST(Propose, BoirdAmbiguity) {
  const CorpusIndex index(small_corpus());
  const auto p = index.propose("boird", 3);
  ASSERT_EQ(p.candidates.size(), 3u);
  // both at distance 1; board is more frequent so it sorts first
  EXPECT_EQ(p.candidates[0].word, "board");
  EXPECT_EQ(p.candidates[0].distance, 1u);
  EXPECT_EQ(p.candidates[1].word, "bird");
  EXPECT_EQ(p.candidates[1].distance, 1u);
  EXPECT_EQ(p.source_word, "boird");
}

TEST(Propose, KLargerThanCorpusReturnsAll) {
  const auto c = small_corpus();
  const CorpusIndex index(c);
  const auto p = index.propose("xyz", 100);
  EXPECT_EQ(p.candidates.size(), c.size());
  for (std::size_t i = 1; i < p.candidates.size(); ++i)
    EXPECT_TRUE(corpus::candidate_before(p.candidates[i - 1], p.candidates[i]));
}

TEST(Propose, ZeroKIsAConfigError) {
  const CorpusIndex index(small_corpus());
  EXPECT_THROW(index.propose("bird", 0), ConfigError);
}

TEST(Propose, ExactWordComesFirst) {
  const CorpusIndex index(small_corpus());
  const auto p = index.propose("walking", 2);
  EXPECT_EQ(p.candidates[0].word, "walking");
  EXPECT_EQ(p.candidates[0].distance, 0u);
  EXPECT_EQ(p.candidates[1].word, "talking");
}

TEST(ProposeProperty, IndexEqualsLinearScanOnRandomCorpora) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, std::uint64_t> entries;
    const std::size_t n = 20 + rng.uniform_index(400);
    while (entries.size() < n) entries[random_ascii(rng, 1, 8, "abcdef")] = 1 + rng.uniform_index(20);
    const Corpus c = Corpus::from_entries(entries);
    const CorpusIndex index(c);
    for (int q = 0; q < 50; ++q) {
      const auto word = random_ascii(rng, 1, 9, "abcdefg");
      const std::size_t k = 1 + rng.uniform_index(30);
      const auto fast = index.propose(word, k);
      const auto slow = corpus::propose_linear(c, word, k);
      ASSERT_EQ(fast.candidates, slow.candidates) << "query " << word << " k=" << k;
    }
  }
}

TEST(ProposeProperty, PrefixMonotoneInK) {
  const auto c = corpus::load_corpus(DENOISER_DATA_DIR "/en_lexicon.tsv");
  const CorpusIndex index(c);
  for (const char* word : {"boird", "wal4ingm", "guitr", "xq"}) {
    const auto big = index.propose(word, 25).candidates;
    for (std::size_t k : {1u, 2u, 5u, 10u}) {
      const auto small = index.propose(word, k).candidates;
      ASSERT_EQ(small.size(), k);
      for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(small[i], big[i]) << word << " k=" << k;
    }
  }
}

TEST(ProposeProperty, PruningSkipsMostOfTheLexicon) {
  const CorpusIndex index(corpus::load_corpus(DENOISER_DATA_DIR "/en_lexicon.tsv"));
  const auto p = index.propose("walkng", 10);
  EXPECT_EQ(p.candidates[0].word, "walking");
  EXPECT_LT(CorpusIndex::last_query_evaluations(), index.corpus().size());
  index.propose("walking", 1);
  EXPECT_LT(CorpusIndex::last_query_evaluations(), index.corpus().size() / 4);
}
