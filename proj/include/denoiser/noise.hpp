#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "denoiser/text.hpp"

namespace denoiser::noise {

enum class NoiseKind { Substitute, Insert, Delete, Mixed };

std::string_view to_string(NoiseKind kind) noexcept;
NoiseKind parse_noise_kind(std::string_view name);  // throws ConfigError

struct NoiseSpec {
  double p = 0.0;
  NoiseKind kind = NoiseKind::Mixed;
  std::uint64_t seed = 0;
  std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyz";

  void validate() const;  // throws ConfigError
};

/// Character-level contamination. Each class gets its own generator seeded
/// with derive_seed(spec.seed, class_id); within a class, words are visited
/// in order and characters left to right. Per character:
///
///   1. u = uniform01(); the character is perturbed iff u < p.
///   2. Mixed only: op = uniform_index(3) -> substitute, insert, delete.
///   3. substitute: replacement drawn uniformly from the alphabet minus the
///      original character (no draw and no change if nothing remains).
///      insert: the character is kept and a uniform alphabet character is
///      placed right behind it; inserted characters are never re-noised.
///      delete: dropped, unless it would leave the word empty.
///
/// Word count and order never change.
std::vector<text::ClassText> perturb(const std::vector<text::ClassText>& texts, const NoiseSpec& spec);

/// Realized per-character edit rate: total word edit distance over total
/// clean characters. Throws ShapeError on class or word count mismatch.
double perturbation_rate(const std::vector<text::ClassText>& clean,
                         const std::vector<text::ClassText>& noisy);

}  // namespace denoiser::noise
