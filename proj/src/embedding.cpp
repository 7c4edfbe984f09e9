#include "denoiser/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>

#include "denoiser/errors.hpp"
#include "denoiser/random.hpp"
#include "json.hpp"

namespace denoiser::embedding {

using nlohmann::json;

EmbeddingVec EmbeddingVec::normalized(std::vector<double> values) {
  if (values.empty()) throw ShapeError("embedding has dimension 0");
  double sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ShapeError("embedding has non-finite component");
    sq += v * v;
  }
  if (!(sq > 0.0)) throw ShapeError("embedding has zero norm");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : values) v *= inv;
  return EmbeddingVec(std::move(values));
}

double cosine_similarity(const EmbeddingVec& a, const EmbeddingVec& b) {
  if (a.dimension() != b.dimension()) {
    throw ShapeError("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                     std::to_string(b.dimension()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

text::ClassText PromptTemplate::apply(const text::ClassText& t) const {
  if (empty()) return t;
  text::ClassText out;
  out.class_id = t.class_id;
  if (!prefix.empty()) {
    auto p = text::tokenize(prefix);
    out.words.insert(out.words.end(), p.words.begin(), p.words.end());
  }
  out.words.insert(out.words.end(), t.words.begin(), t.words.end());
  if (!suffix.empty()) {
    auto s = text::tokenize(suffix);
    out.words.insert(out.words.end(), s.words.begin(), s.words.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

LexiconEmbedder::LexiconEmbedder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension < 2) throw ConfigError("lexicon embedder needs dimension >= 2");
}

std::vector<double> LexiconEmbedder::word_vector(std::string_view word) const {
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(std::string(word)); it != cache_.end()) return it->second;
  }
  Rng rng(seeded_hash(seed_, word));
  std::vector<double> v(dimension_);
  for (double& x : v) x = rng.normal();
  std::unique_lock lock(cache_mutex_);
  return cache_.try_emplace(std::string(word), std::move(v)).first->second;
}

EmbeddingVec LexiconEmbedder::encode_text(const text::ClassText& t) const {
  std::vector<double> sum(dimension_, 0.0);
  for (const auto& word : t.words) {
    const auto v = word_vector(word);
    for (std::size_t i = 0; i < dimension_; ++i) sum[i] += v[i];
  }
  return EmbeddingVec::normalized(std::move(sum));
}

// ---------------------------------------------------------------------------

TrigramEmbedder::TrigramEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension < 8) throw ConfigError("trigram embedder needs dimension >= 8");
}

EmbeddingVec TrigramEmbedder::encode_text(const text::ClassText& t) const {
  std::vector<double> counts(dimension_, 0.0);
  for (const auto& word : t.words) {
    std::u32string marked = U"\u0002" + text::to_code_points(word) + U"\u0003";
    for (std::size_t i = 0; i + 3 <= marked.size(); ++i) {
      const std::string gram = text::to_utf8(std::u32string_view(marked).substr(i, 3));
      counts[fnv1a64(gram) % dimension_] += 1.0;
    }
  }
  return EmbeddingVec::normalized(std::move(counts));
}

// ---------------------------------------------------------------------------

StoreProvider::StoreProvider(std::map<std::string, EmbeddingVec> texts, std::size_t dimension)
    : texts_(std::move(texts)), dimension_(dimension) {}

EmbeddingVec StoreProvider::encode_text(const text::ClassText& t) const {
  const std::string key = t.render();
  auto it = texts_.find(key);
  if (it == texts_.end()) throw MissingEmbedding(key);
  return it->second;
}

PromptedProvider::PromptedProvider(std::shared_ptr<const EmbeddingProvider> inner, PromptTemplate prompt)
    : inner_(std::move(inner)), prompt_(std::move(prompt)) {}

EmbeddingVec PromptedProvider::encode_text(const text::ClassText& t) const {
  return inner_->encode_text(prompt_.apply(t));
}

// ---------------------------------------------------------------------------

std::shared_ptr<StoreProvider> EmbeddingStore::provider() const {
  return std::make_shared<StoreProvider>(texts, dimension);
}

EmbeddingStore parse_embedding_store(std::istream& in) {
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw StoreError("embedding store line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(e.what());
    }
    if (!record.is_object() || !record.contains("key") || !record.contains("kind") ||
        !record.contains("vec")) {
      fail("record needs key, kind and vec");
    }
    if (!record["key"].is_string() || !record["kind"].is_string() || !record["vec"].is_array()) {
      fail("wrong field types");
    }
    std::vector<double> values;
    for (const auto& x : record["vec"]) {
      if (!x.is_number()) fail("vec entries must be numbers");
      values.push_back(x.get<double>());
    }
    if (store.dimension == 0) store.dimension = values.size();
    if (values.size() != store.dimension) {
      fail("dimension " + std::to_string(values.size()) + " differs from " +
           std::to_string(store.dimension));
    }
    EmbeddingVec vec = [&] {
      try {
        return EmbeddingVec::normalized(std::move(values));
      } catch (const ShapeError& e) {
        fail(e.what());
      }
      throw StoreError("unreachable");
    }();

    const auto key = record["key"].get<std::string>();
    const auto kind = record["kind"].get<std::string>();
    if (kind == "text") {
      std::string normalized;
      try {
        normalized = text::tokenize(key).render();
      } catch (const InvalidClassText& e) {
        fail(e.what());
      }
      store.texts.insert_or_assign(normalized, std::move(vec));
    } else if (kind == "visual") {
      int id = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
      if (ec != std::errc() || ptr != key.data() + key.size()) fail("visual key must be an integer id");
      std::optional<int> truth;
      if (record.contains("true_class") && !record["true_class"].is_null()) {
        if (!record["true_class"].is_number_integer()) fail("true_class must be an integer or null");
        truth = record["true_class"].get<int>();
      }
      store.visuals.push_back(VisualSample{id, std::move(vec), truth});
    } else {
      fail("kind must be \"text\" or \"visual\"");
    }
  }
  return store;
}

EmbeddingStore load_embedding_store(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding store " + path.string());
  return parse_embedding_store(in);
}

namespace {

json vector_json(const EmbeddingVec& v) {
  json arr = json::array();
  for (double x : v.values()) arr.push_back(x);
  return arr;
}

}  // namespace

std::string format_visual_record(const VisualSample& sample) {
  json record = {{"key", std::to_string(sample.sample_id)},
                 {"kind", "visual"},
                 {"true_class", sample.true_class ? json(*sample.true_class) : json(nullptr)},
                 {"vec", vector_json(sample.vec)}};
  return record.dump();
}

std::string format_embedding_store(const EmbeddingStore& store) {
  std::string out;
  for (const auto& [key, vec] : store.texts) {
    json record = {{"key", key}, {"kind", "text"}, {"true_class", nullptr}, {"vec", vector_json(vec)}};
    out += record.dump();
    out.push_back('\n');
  }
  for (const auto& sample : store.visuals) {
    out += format_visual_record(sample);
    out.push_back('\n');
  }
  return out;
}

std::vector<VisualSample> generate_world(const std::vector<text::ClassText>& classes,
                                         const EmbeddingProvider& provider, std::size_t m,
                                         double sigma, std::uint64_t seed) {
  if (m == 0) throw ConfigError("samples per class must be at least 1");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
  std::vector<VisualSample> samples;
  samples.reserve(classes.size() * m);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const EmbeddingVec center = provider.encode_text(classes[c]);
    Rng rng(derive_seed(seed, c));
    for (std::size_t j = 0; j < m; ++j) {
      const int id = static_cast<int>(samples.size());
      if (sigma == 0.0) {
        samples.push_back(VisualSample{id, center, classes[c].class_id});
        continue;
      }
      std::vector<double> v(center.values().begin(), center.values().end());
      for (double& x : v) x += sigma * rng.normal();
      samples.push_back(VisualSample{id, EmbeddingVec::normalized(std::move(v)), classes[c].class_id});
    }
  }
  return samples;
}

}  // namespace denoiser::embedding
