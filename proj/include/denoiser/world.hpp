#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "denoiser/embedding.hpp"
#include "denoiser/text.hpp"

namespace denoiser::world {

enum class EmbedderKind { Lexicon, Trigram };

std::string_view to_string(EmbedderKind kind) noexcept;
EmbedderKind parse_embedder_kind(std::string_view name);

struct ProviderSpec {
  EmbedderKind kind = EmbedderKind::Lexicon;
  std::size_t dimension = 64;
  std::uint64_t seed = 13;  // lexicon embedder only
  embedding::PromptTemplate prompt;

  friend bool operator==(const ProviderSpec& a, const ProviderSpec& b) {
    return a.kind == b.kind && a.dimension == b.dimension && a.seed == b.seed &&
           a.prompt.prefix == b.prompt.prefix && a.prompt.suffix == b.prompt.suffix;
  }
};

std::shared_ptr<const embedding::EmbeddingProvider> make_provider(const ProviderSpec& spec);

/// A synthetic evaluation world: clean class texts, the provider that
/// embeds them, and visual samples scattered around each class embedding.
///
/// On disk it is a directory holding
///   classes.txt     clean class list
///   visual.jsonl    visual records in the embedding-store format
///   provider.json   provider spec plus generation parameters
struct World {
  std::vector<text::ClassText> classes;
  std::vector<embedding::VisualSample> samples;
  ProviderSpec provider;
  std::size_t samples_per_class = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

World generate(std::vector<text::ClassText> classes, const ProviderSpec& provider,
               std::size_t samples_per_class, double sigma, std::uint64_t seed);

std::string format_provider_json(const World& world);
void write_world(const std::filesystem::path& dir, const World& world);
World read_world(const std::filesystem::path& dir);

}  // namespace denoiser::world
