#include "denoiser/noise.hpp"

#include <algorithm>

#include "denoiser/errors.hpp"
#include "denoiser/random.hpp"

namespace denoiser::noise {

namespace {

enum class Op { Substitute, Insert, Delete };

std::u32string perturb_word(const std::u32string& word, const NoiseSpec& spec, Rng& rng) {
  std::u32string out;
  out.reserve(word.size() * 2);
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char32_t c = word[i];
    if (!(rng.uniform01() < spec.p)) {
      out.push_back(c);
      continue;
    }
    Op op = Op::Substitute;
    switch (spec.kind) {
      case NoiseKind::Substitute: op = Op::Substitute; break;
      case NoiseKind::Insert: op = Op::Insert; break;
      case NoiseKind::Delete: op = Op::Delete; break;
      case NoiseKind::Mixed: op = static_cast<Op>(rng.uniform_index(3)); break;
    }
    switch (op) {
      case Op::Substitute: {
        std::u32string pool;
        for (char32_t a : spec.alphabet) {
          if (a != c) pool.push_back(a);
        }
        out.push_back(pool.empty() ? c : pool[rng.uniform_index(pool.size())]);
        break;
      }
      case Op::Insert:
        out.push_back(c);
        out.push_back(spec.alphabet[rng.uniform_index(spec.alphabet.size())]);
        break;
      case Op::Delete:
        if (out.empty() && i + 1 == word.size()) out.push_back(c);
        break;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::Substitute: return "substitute";
    case NoiseKind::Insert: return "insert";
    case NoiseKind::Delete: return "delete";
    case NoiseKind::Mixed: return "mixed";
  }
  return "mixed";
}

NoiseKind parse_noise_kind(std::string_view name) {
  for (NoiseKind k : {NoiseKind::Substitute, NoiseKind::Insert, NoiseKind::Delete, NoiseKind::Mixed}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown noise kind \"" + std::string(name) + "\"");
}

void NoiseSpec::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("noise probability must lie in [0, 1]");
  if (alphabet.empty()) throw ConfigError("noise alphabet must not be empty");
}

std::vector<text::ClassText> perturb(const std::vector<text::ClassText>& texts, const NoiseSpec& spec) {
  spec.validate();
  std::vector<text::ClassText> out;
  out.reserve(texts.size());
  for (const auto& clean : texts) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(clean.class_id)));
    text::ClassText noisy;
    noisy.class_id = clean.class_id;
    noisy.words.reserve(clean.words.size());
    for (const auto& word : clean.words) {
      noisy.words.push_back(text::to_utf8(perturb_word(text::to_code_points(word), spec, rng)));
    }
    out.push_back(std::move(noisy));
  }
  return out;
}

double perturbation_rate(const std::vector<text::ClassText>& clean,
                         const std::vector<text::ClassText>& noisy) {
  if (clean.size() != noisy.size()) throw ShapeError("class counts differ");
  std::size_t edits = 0;
  std::size_t characters = 0;
  for (std::size_t c = 0; c < clean.size(); ++c) {
    if (clean[c].size() != noisy[c].size()) {
      throw ShapeError("word counts differ for class " + std::to_string(c));
    }
    for (std::size_t i = 0; i < clean[c].size(); ++i) {
      edits += text::edit_distance(clean[c].words[i], noisy[c].words[i]);
      characters += text::length(clean[c].words[i]);
    }
  }
  return characters == 0 ? 0.0 : static_cast<double>(edits) / static_cast<double>(characters);
}

}  // namespace denoiser::noise
