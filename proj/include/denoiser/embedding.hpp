#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "denoiser/text.hpp"

namespace denoiser::embedding {

/// Unit-norm dense vector. The norm is enforced at construction.
class EmbeddingVec {
 public:
  /// Scales `values` to unit length. Throws ShapeError for empty, zero or
  /// non-finite input.
  static EmbeddingVec normalized(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t dimension() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVec&, const EmbeddingVec&) = default;

 private:
  explicit EmbeddingVec(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

/// Dot product of two unit vectors clamped to [-1, 1]. ShapeError on
/// dimension mismatch.
double cosine_similarity(const EmbeddingVec& a, const EmbeddingVec& b);

struct VisualSample {
  int sample_id = 0;
  EmbeddingVec vec;
  std::optional<int> true_class;
};

/// Text encoder contract. Implementations are deterministic and safe to
/// call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingVec encode_text(const text::ClassText& text) const = 0;
  virtual std::size_t dimension() const noexcept = 0;
};

/// Optional prompt words wrapped around every class text before encoding.
struct PromptTemplate {
  std::string prefix;
  std::string suffix;

  bool empty() const noexcept { return prefix.empty() && suffix.empty(); }
  text::ClassText apply(const text::ClassText& text) const;
};

/// Each distinct word gets a fixed Gaussian vector seeded by
/// seeded_hash(seed, word); a text is the normalized sum of its words.
/// Spelling neighbours are unrelated, and word order is ignored.
class LexiconEmbedder final : public EmbeddingProvider {
 public:
  LexiconEmbedder(std::uint64_t seed, std::size_t dimension);

  EmbeddingVec encode_text(const text::ClassText& text) const override;
  std::size_t dimension() const noexcept override { return dimension_; }

  std::vector<double> word_vector(std::string_view word) const;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

/// Character trigrams of each word, with start/end markers, hashed with
/// FNV-1a into `dimension` buckets; counts are L2-normalized.
class TrigramEmbedder final : public EmbeddingProvider {
 public:
  explicit TrigramEmbedder(std::size_t dimension);

  EmbeddingVec encode_text(const text::ClassText& text) const override;
  std::size_t dimension() const noexcept override { return dimension_; }

 private:
  std::size_t dimension_;
};

/// Answers exactly the texts it was given, keyed by rendered text.
class StoreProvider final : public EmbeddingProvider {
 public:
  StoreProvider(std::map<std::string, EmbeddingVec> texts, std::size_t dimension);

  EmbeddingVec encode_text(const text::ClassText& text) const override;  // MissingEmbedding
  std::size_t dimension() const noexcept override { return dimension_; }

 private:
  std::map<std::string, EmbeddingVec> texts_;
  std::size_t dimension_;
};

class PromptedProvider final : public EmbeddingProvider {
 public:
  PromptedProvider(std::shared_ptr<const EmbeddingProvider> inner, PromptTemplate prompt);

  EmbeddingVec encode_text(const text::ClassText& text) const override;
  std::size_t dimension() const noexcept override { return inner_->dimension(); }

 private:
  std::shared_ptr<const EmbeddingProvider> inner_;
  PromptTemplate prompt_;
};

/// In-memory form of the JSONL store: one record per line,
///   {"key": "...", "kind": "text"|"visual", "true_class": int|null, "vec": [...]}
/// Visual keys are decimal sample ids.
struct EmbeddingStore {
  std::size_t dimension = 0;
  std::map<std::string, EmbeddingVec> texts;
  std::vector<VisualSample> visuals;

  std::shared_ptr<StoreProvider> provider() const;
};

EmbeddingStore parse_embedding_store(std::istream& in);
EmbeddingStore load_embedding_store(const std::filesystem::path& path);
std::string format_embedding_store(const EmbeddingStore& store);
std::string format_visual_record(const VisualSample& sample);

/// m samples per class: normalize(encode_text(T_c) + sigma * g) with g drawn
/// from Rng(derive_seed(seed, c)). sigma == 0 copies the class embedding.
std::vector<VisualSample> generate_world(const std::vector<text::ClassText>& classes,
                                         const EmbeddingProvider& provider, std::size_t m,
                                         double sigma, std::uint64_t seed);

}  // namespace denoiser::embedding
