#include "denoiser/world.hpp"

#include "denoiser/errors.hpp"
#include "denoiser/io.hpp"
#include "json.hpp"

namespace denoiser::world {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(EmbedderKind kind) noexcept {
  return kind == EmbedderKind::Lexicon ? "lexicon" : "trigram";
}

EmbedderKind parse_embedder_kind(std::string_view name) {
  if (name == "lexicon") return EmbedderKind::Lexicon;
  if (name == "trigram") return EmbedderKind::Trigram;
  throw ConfigError("unknown embedder \"" + std::string(name) + "\"");
}

std::shared_ptr<const embedding::EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  std::shared_ptr<const embedding::EmbeddingProvider> base;
  if (spec.kind == EmbedderKind::Lexicon) {
    base = std::make_shared<embedding::LexiconEmbedder>(spec.seed, spec.dimension);
  } else {
    base = std::make_shared<embedding::TrigramEmbedder>(spec.dimension);
  }
  if (spec.prompt.empty()) return base;
  return std::make_shared<embedding::PromptedProvider>(std::move(base), spec.prompt);
}

World generate(std::vector<text::ClassText> classes, const ProviderSpec& provider,
               std::size_t samples_per_class, double sigma, std::uint64_t seed) {
  if (classes.empty()) throw ConfigError("world needs at least one class");
  World w;
  w.provider = provider;
  w.samples_per_class = samples_per_class;
  w.sigma = sigma;
  w.seed = seed;
  const auto p = make_provider(provider);
  w.samples = embedding::generate_world(classes, *p, samples_per_class, sigma, seed);
  w.classes = std::move(classes);
  return w;
}

std::string format_provider_json(const World& world) {
  json doc = {{"embedder", to_string(world.provider.kind)},
              {"dim", world.provider.dimension},
              {"seed", world.provider.seed},
              {"prefix", world.provider.prompt.prefix},
              {"suffix", world.provider.prompt.suffix},
              {"samples_per_class", world.samples_per_class},
              {"sigma", world.sigma},
              {"world_seed", world.seed}};
  return doc.dump(2) + "\n";
}

void write_world(const fs::path& dir, const World& world) {
  std::string visuals;
  for (const auto& s : world.samples) {
    visuals += embedding::format_visual_record(s);
    visuals.push_back('\n');
  }
  io::OutputBatch batch;
  batch.stage(dir / "classes.txt", text::format_class_list(world.classes));
  batch.stage(dir / "visual.jsonl", visuals);
  batch.stage(dir / "provider.json", format_provider_json(world));
  batch.commit();
}

World read_world(const fs::path& dir) {
  World w;
  w.classes = text::read_class_list(dir / "classes.txt");
  json doc;
  try {
    doc = json::parse(io::read_file(dir / "provider.json"));
    w.provider.kind = parse_embedder_kind(doc.at("embedder").get<std::string>());
    w.provider.dimension = doc.at("dim").get<std::size_t>();
    w.provider.seed = doc.value("seed", std::uint64_t{0});
    w.provider.prompt.prefix = doc.value("prefix", std::string{});
    w.provider.prompt.suffix = doc.value("suffix", std::string{});
    w.samples_per_class = doc.value("samples_per_class", std::size_t{0});
    w.sigma = doc.value("sigma", 0.0);
    w.seed = doc.value("world_seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError("malformed provider.json in " + dir.string() + ": " + e.what());
  }
  auto store = embedding::load_embedding_store(dir / "visual.jsonl");
  if (!store.texts.empty()) throw StoreError("world visual.jsonl must hold visual records only");
  if (!store.visuals.empty() && store.dimension != w.provider.dimension) {
    throw StoreError("visual dimension does not match provider dimension");
  }
  w.samples = std::move(store.visuals);
  return w;
}

}  // namespace denoiser::world
