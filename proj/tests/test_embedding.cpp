#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include "denoiser/embedding.hpp"
#include "denoiser/errors.hpp"
#include "denoiser/world.hpp"

using namespace denoiser;
using namespace denoiser::embedding;

namespace {

double norm(const EmbeddingVec& v) {
  double s = 0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

text::ClassText t(const char* s, int id = 0) { return text::tokenize(s, id); }

}  // namespace

TEST(EmbeddingVec, NormalizesAndRejectsDegenerate) {
  const auto v = EmbeddingVec::normalized({3.0, 4.0});
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
  EXPECT_THROW(EmbeddingVec::normalized({}), ShapeError);
  EXPECT_THROW(EmbeddingVec::normalized({0.0, 0.0}), ShapeError);
  EXPECT_THROW(EmbeddingVec::normalized({1.0, NAN}), ShapeError);
}

TEST(EmbeddingVec, CosineIsClampedAndShapeChecked) {
  const auto a = EmbeddingVec::normalized({1.0, 0.0});
  const auto b = EmbeddingVec::normalized({0.0, 2.0});
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_THROW(cosine_similarity(a, EmbeddingVec::normalized({1.0, 1.0, 1.0})), ShapeError);
}

TEST(Lexicon, DeterministicUnitVectors) {
  const LexiconEmbedder a(13, 64), b(13, 64), c(14, 64);
  const auto va = a.encode_text(t("red fox"));
  EXPECT_EQ(va, b.encode_text(t("red fox")));
  EXPECT_NE(va, c.encode_text(t("red fox")));
  EXPECT_NEAR(norm(va), 1.0, 1e-12);
  EXPECT_EQ(va.dimension(), 64u);
}

TEST(Lexicon, GoldenValues) {
  const LexiconEmbedder e(13, 8);
  const auto w = e.word_vector("bird");
  ASSERT_EQ(w.size(), 8u);
  const std::vector<double> golden = {-0.49453362918308325, 0.67268908503797376, -0.38976455455304987,
                                      -0.039308664947382548, -0.64142566894619613, -0.04764406152498353,
                                      -0.74093545207405476, 0.21965055505419573};
  for (std::size_t i = 0; i < golden.size(); ++i) EXPECT_NEAR(w[i], golden[i], 1e-12);
}

TEST(Lexicon, SumOfWordsIgnoresOrder) {
  const LexiconEmbedder e(13, 64);
  EXPECT_EQ(e.encode_text(t("red fox")), e.encode_text(t("fox red")));
  // unrelated spellings are near-orthogonal in 64 dims
  EXPECT_LT(std::abs(cosine_similarity(e.encode_text(t("bird")), e.encode_text(t("board")))), 0.5);
}

TEST(Lexicon, ConcurrentEncodingAgrees) {
  const LexiconEmbedder e(5, 32);
  std::vector<std::vector<EmbeddingVec>> results(4);
  std::vector<std::thread> threads;
  for (int k = 0; k < 4; ++k)
    threads.emplace_back([&, k] {
      for (int i = 0; i < 500; ++i) results[k].push_back(e.encode_text(t(("w" + std::to_string(i % 97)).c_str())));
    });
  for (auto& th : threads) th.join();
  for (int k = 1; k < 4; ++k) EXPECT_EQ(results[k], results[0]);
}

TEST(Trigram, SpellingNeighboursAreClose) {
  const TrigramEmbedder e(256);
  const auto walking = e.encode_text(t("walking"));
  EXPECT_GT(cosine_similarity(walking, e.encode_text(t("walkng"))),
            cosine_similarity(walking, e.encode_text(t("guitar"))));
  EXPECT_THROW(TrigramEmbedder(4), ConfigError);
}

TEST(Prompted, WrapsText) {
  auto inner = std::make_shared<LexiconEmbedder>(13, 32);
  const PromptedProvider p(inner, {"a video of", ""});
  EXPECT_EQ(p.encode_text(t("archery")), inner->encode_text(t("a video of archery")));
  const PromptTemplate tmpl{"a photo of", "in the wild"};
  EXPECT_EQ(tmpl.apply(t("red fox", 4)).render(), "a photo of red fox in the wild");
  EXPECT_EQ(tmpl.apply(t("red fox", 4)).class_id, 4);
}

TEST(Store, ParseAndRoundTrip) {
  std::istringstream in(
      "{\"key\": \"bird\", \"kind\": \"text\", \"true_class\": null, \"vec\": [1, 0, 0]}\n"
      "{\"key\": \"board\", \"kind\": \"text\", \"true_class\": null, \"vec\": [0, 2, 0]}\n"
      "{\"key\": \"0\", \"kind\": \"visual\", \"true_class\": 0, \"vec\": [0.9, 0.1, 0]}\n"
      "{\"key\": \"1\", \"kind\": \"visual\", \"true_class\": null, \"vec\": [0, 1, 0.1]}\n");
  const auto store = parse_embedding_store(in);
  EXPECT_EQ(store.dimension, 3u);
  ASSERT_EQ(store.visuals.size(), 2u);
  EXPECT_EQ(store.visuals[0].true_class, 0);
  EXPECT_FALSE(store.visuals[1].true_class.has_value());
  const auto provider = store.provider();
  EXPECT_DOUBLE_EQ(provider->encode_text(t("board"))[1], 1.0);
  EXPECT_THROW(provider->encode_text(t("cat")), MissingEmbedding);

  std::istringstream again(format_embedding_store(store));
  const auto back = parse_embedding_store(again);
  EXPECT_EQ(back.texts, store.texts);
  ASSERT_EQ(back.visuals.size(), 2u);
  EXPECT_EQ(back.visuals[0].vec, store.visuals[0].vec);
}

TEST(Store, MalformedLinesAreStoreErrors) {
  std::istringstream bad_dim(
      "{\"key\": \"a\", \"kind\": \"text\", \"true_class\": null, \"vec\": [1, 0]}\n"
      "{\"key\": \"b\", \"kind\": \"text\", \"true_class\": null, \"vec\": [1, 0, 0]}\n");
  EXPECT_THROW(parse_embedding_store(bad_dim), StoreError);
  std::istringstream bad_json("{\"key\": \"a\", \"kind\": \n");
  EXPECT_THROW(parse_embedding_store(bad_json), StoreError);
  std::istringstream bad_kind("{\"key\": \"a\", \"kind\": \"audio\", \"true_class\": null, \"vec\": [1]}\n");
  EXPECT_THROW(parse_embedding_store(bad_kind), StoreError);
}

TEST(World, ZeroSigmaCopiesClassEmbedding) {
  const LexiconEmbedder e(13, 16);
  const std::vector<text::ClassText> classes{t("bird", 0), t("red fox", 1)};
  const auto samples = generate_world(classes, e, 3, 0.0, 1);
  ASSERT_EQ(samples.size(), 6u);
  for (const auto& s : samples) EXPECT_EQ(s.vec, e.encode_text(classes.at(*s.true_class)));
}

TEST(World, SamplesScatterAroundTheirClass) {
  const LexiconEmbedder e(13, 64);
  const std::vector<text::ClassText> classes{t("bird", 0), t("red fox", 1), t("archery", 2)};
  const auto samples = generate_world(classes, e, 10, 0.1, 9);
  for (const auto& s : samples) {
    const double own = cosine_similarity(s.vec, e.encode_text(classes.at(*s.true_class)));
    EXPECT_GT(own, 0.5);
    for (const auto& c : classes)
      if (c.class_id != *s.true_class) EXPECT_LT(cosine_similarity(s.vec, e.encode_text(c)), own);
  }
}

TEST(World, DirectoryRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "denoiser_world_rt";
  std::filesystem::remove_all(dir);
  world::ProviderSpec spec;
  spec.dimension = 16;
  spec.prompt = {"a video of", ""};
  const auto w = world::generate({t("bird", 0), t("red fox", 1)}, spec, 4, 0.2, 3);
  world::write_world(dir, w);
  const auto back = world::read_world(dir);
  EXPECT_EQ(back.classes, w.classes);
  EXPECT_EQ(back.provider, w.provider);
  EXPECT_EQ(back.samples_per_class, 4u);
  EXPECT_EQ(back.seed, 3u);
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].true_class, w.samples[i].true_class);
    for (std::size_t d = 0; d < 16; ++d) EXPECT_NEAR(back.samples[i].vec[d], w.samples[i].vec[d], 1e-12);
  }
  std::filesystem::remove_all(dir);
}
