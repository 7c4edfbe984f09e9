#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "denoiser/corpus.hpp"
#include "denoiser/denoiser.hpp"
#include "denoiser/embedding.hpp"
#include "denoiser/noise.hpp"
#include "denoiser/text.hpp"
#include "denoiser/world.hpp"

namespace denoiser::eval {

/// Percentage of samples whose label equals the truth (class positions).
double top1_accuracy(const core::Assignment& assignment, std::span<const std::size_t> truth);

/// true_class of every sample; ShapeError if one is missing.
std::vector<std::size_t> truth_labels(std::span<const embedding::VisualSample> samples);

/// Percentage of classes whose text matches exactly after lowercasing and
/// whitespace normalization.
double label_accuracy(const std::vector<text::ClassText>& pred, const std::vector<text::ClassText>& truth);

/// Mean cosine between encode(pred_c) and encode(truth_c), as a percentage.
/// Values live in the provider's space, so synthetic-provider numbers are not
/// comparable to CLIP-space numbers.
double semantic_similarity(const std::vector<text::ClassText>& pred,
                           const std::vector<text::ClassText>& truth,
                           const embedding::EmbeddingProvider& provider);

/// Uni-modal corrector: every word becomes its nearest corpus word, ties
/// broken by higher frequency, then lexicographically.
std::vector<text::ClassText> frequency_baseline(const std::vector<text::ClassText>& noisy,
                                                const corpus::CorpusIndex& index);

struct ClassRow {
  int class_id = 0;
  std::string truth;
  std::string noisy;
  std::string predicted;
  bool exact = false;
  double similarity = 0.0;  // percentage
};

struct Report {
  std::optional<double> top1_before;
  std::optional<double> top1_after;
  double label_acc = 0.0;
  double semantic_similarity = 0.0;
  std::optional<double> realized_noise_rate;
  std::string config_json = "{}";  // echo of the configuration that produced the report
  std::vector<ClassRow> rows;
};

/// Scores `pred` against `truth`. Top-1 numbers need samples that all carry
/// true_class; the "before" numbers need `noisy`.
Report evaluate(const std::vector<text::ClassText>& truth, const std::vector<text::ClassText>& pred,
                const std::vector<text::ClassText>* noisy,
                std::span<const embedding::VisualSample> samples,
                const embedding::EmbeddingProvider& provider);

std::string format_report_json(const Report& report);

// --- synthetic experiments --------------------------------------------------

/// Recipe for a seeded synthetic world whose classes are drawn from the
/// corpus. Defaults are the acceptance world.
struct WorldRecipe {
  std::size_t n_classes = 20;
  std::size_t words_per_class = 2;
  world::ProviderSpec provider{world::EmbedderKind::Lexicon, 64, 13, {}};
  std::size_t samples_per_class = 25;
  double sigma = 0.1;
};

/// n_classes texts of distinct words drawn uniformly from the corpus with
/// Rng(derive_seed(seed, 0)).
std::vector<text::ClassText> draw_classes(const corpus::Corpus& corpus, std::size_t n_classes,
                                          std::size_t words_per_class, std::uint64_t seed);

/// Classes from draw_classes(seed), samples generated with
/// derive_seed(seed, 1).
world::World build_world(const corpus::Corpus& corpus, const WorldRecipe& recipe, std::uint64_t seed);

enum class Method { Denoiser, FrequencyBaseline, Identity };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

struct Cell {
  std::uint64_t world_seed = 7;
  noise::NoiseSpec noise;
  core::DecodeConfig config;
  Method method = Method::Denoiser;
};

struct CellResult {
  Cell cell;
  Report report;
  std::vector<text::ClassText> noisy;
  std::vector<text::ClassText> predicted;
  double wall_ms = 0.0;
};

/// Perturbs the world's clean classes, corrects them with `cell.method` and
/// scores the result.
CellResult run_cell(const world::World& world, const corpus::CorpusIndex& index, const Cell& cell);

struct SweepGrid {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> classes_file;  // fixed classes instead of drawing them
  WorldRecipe recipe;
  std::vector<std::uint64_t> world_seeds{7};
  std::vector<noise::NoiseKind> kinds{noise::NoiseKind::Mixed};
  std::vector<double> rates{0.1};
  std::vector<std::uint64_t> noise_seeds{42};
  std::vector<core::DecodeConfig> configs{core::DecodeConfig{}};
  std::vector<Method> methods{Method::Denoiser};

  std::size_t cell_count() const noexcept;
};

/// Parses a JSON grid; relative paths resolve against `base_dir`. Throws
/// ConfigError for malformed or empty grids.
SweepGrid parse_grid(const std::string& json_text, const std::filesystem::path& base_dir);
SweepGrid load_grid(const std::filesystem::path& path);

/// Cells in row-major order: world seed, method, noise kind, rate, noise
/// seed, config. `jobs` > 1 runs cells on worker threads; output order and
/// contents do not depend on it.
std::vector<CellResult> run_sweep(const SweepGrid& grid, const corpus::CorpusIndex& index,
                                  std::size_t jobs = 1);

/// One header line plus one line per cell. wall_ms is written as 0 unless
/// `record_timing` is set, which keeps repeated sweeps byte-identical.
std::string format_sweep_csv(const std::vector<CellResult>& rows, bool record_timing = false);
std::string format_sweep_json(const std::vector<CellResult>& rows, bool record_timing = false);

std::string config_json(const Cell& cell);

}  // namespace denoiser::eval
