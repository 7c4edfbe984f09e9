#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "denoiser/corpus.hpp"
#include "denoiser/embedding.hpp"
#include "denoiser/text.hpp"

namespace denoiser::core {

enum class AssignmentMode { ClassText, CandidateMax };
enum class Weighting { IntraOnly, InterOnly, Combined };

std::string_view to_string(AssignmentMode mode) noexcept;
std::string_view to_string(Weighting weighting) noexcept;
AssignmentMode parse_assignment_mode(std::string_view name);
Weighting parse_weighting(std::string_view name);

/// Hard assignment of visual samples to classes. Labels and groups use
/// positions: labels[j] indexes the class list, groups[c] lists positions
/// in the sample list.
struct Assignment {
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::size_t>> groups;
  AssignmentMode mode = AssignmentMode::ClassText;

  static Assignment from_labels(std::vector<std::size_t> labels, std::size_t n_classes,
                                AssignmentMode mode);
  std::vector<std::size_t> group_sizes() const;
};

class TemperatureSchedule {
 public:
  enum class Kind { Constant, Linear };

  static TemperatureSchedule constant(double value);
  static TemperatureSchedule linear(double start, double end);
  /// "constant:V" or "linear:START:END".
  static TemperatureSchedule parse(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }

  /// Temperature at 0-based `step` out of `total_steps`. Linear schedules
  /// hit `start` on the first step and `end` on the last; a single-step
  /// schedule uses `end`.
  double at(std::size_t step, std::size_t total_steps) const noexcept;
  std::string to_string() const;

 private:
  TemperatureSchedule(Kind kind, double start, double end);
  Kind kind_;
  double start_;
  double end_;
};

struct DecodeConfig {
  std::size_t k = 10;
  TemperatureSchedule schedule = TemperatureSchedule::linear(0.01, 1.0);
  std::size_t passes = 1;
  Weighting weighting = Weighting::Combined;
  AssignmentMode mode = AssignmentMode::ClassText;
  double similarity_scale = 1.0;
  double max_visual_fraction = 1.0;
  // Divide the summed inter-modal log weights by the number of voters.
  bool mean_log = false;
  // Divide the error model by a frequency prior p(t) = freq / total.
  bool frequency_prior = false;
  std::uint64_t subsample_seed = 0;

  void validate() const;  // throws ConfigError
};

struct DecodeState {
  std::size_t step = 0;  // 1-based word position being decoded; 0 before the first step
  std::vector<text::ClassText> texts;
  std::vector<text::ClassText> original_noisy;
  double lambda = 1.0;
};

/// Numerically stable log-softmax; the result exponentiates to a
/// probability vector.
std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

/// Zero-shot assignment: each sample goes to argmax_c cosine(v, encode(T_c)),
/// ties to the lowest class position.
Assignment classify(std::span<const embedding::VisualSample> visuals,
                    const std::vector<text::ClassText>& texts,
                    const embedding::EmbeddingProvider& provider);

/// argmax_c max_k softmax_k(S(v, T^k_c)) with ties to the lowest class.
/// When every class has exactly one candidate the expression is constant, so
/// this falls back to classify() on those candidates. ConfigError when a
/// class has no candidates.
Assignment classify_candidate_max(std::span<const embedding::VisualSample> visuals,
                                  const std::vector<std::vector<text::ClassText>>& candidate_texts,
                                  const embedding::EmbeddingProvider& provider);

/// softmax(-distance / lambda) over the candidates.
std::vector<double> intra_weight(std::span<const text::WordCandidate> candidates, double lambda);
std::vector<double> intra_log_weight(std::span<const text::WordCandidate> candidates, double lambda);

/// softmax(scale * cosine(v, encode(T^k))) over the candidate texts.
std::vector<double> inter_weight(const embedding::VisualSample& sample,
                                 const std::vector<text::ClassText>& candidate_texts,
                                 const embedding::EmbeddingProvider& provider,
                                 double similarity_scale);

/// Outcome of one generative step for one class.
struct WordDecision {
  std::size_t class_index = 0;
  std::size_t word_index = 0;  // 0-based
  std::string source_word;     // original noisy word the proposals came from
  std::vector<text::WordCandidate> candidates;
  std::vector<double> intra_log;  // empty when the term is not used
  std::vector<double> inter_log;  // summed over voters; empty when unused
  std::vector<double> scores;
  std::size_t chosen = 0;
  std::size_t voters = 0;

  const text::WordCandidate& chosen_candidate() const { return candidates.at(chosen); }
};

/// Candidate texts T^k_{c,i}: `current` with word `word_index` replaced by
/// each candidate.
std::vector<text::ClassText> candidate_texts(const text::ClassText& current, std::size_t word_index,
                                             std::span<const text::WordCandidate> candidates);

/// Picks the best replacement for word state.step of class `class_index`:
///   score(k) = log intra(k) + sum over voters log inter(k | v_j)
/// Proposals always come from the original noisy word. Ties go to the
/// earlier proposal. `global_step` only seeds the voter subsample.
WordDecision decode_word(std::size_t class_index, const DecodeState& state,
                         const Assignment& assignment,
                         std::span<const embedding::VisualSample> visuals,
                         const corpus::CorpusIndex& index,
                         const embedding::EmbeddingProvider& provider, const DecodeConfig& config,
                         std::size_t global_step = 0);

struct StepTrace {
  std::size_t pass = 1;
  std::size_t step = 1;
  std::size_t global_step = 0;
  double lambda = 0.0;
  std::vector<std::size_t> assignment_sizes;
  std::vector<WordDecision> decisions;
};

struct DenoiseResult {
  std::vector<text::ClassText> texts;
  std::vector<StepTrace> trace;
  Assignment final_assignment;
};

/// Alternates discriminative assignment and generative word decoding:
///   for pass in 1..passes, for i in 1..n_max:
///     assign samples with the current texts, set lambda for this global
///     step, decode word i of every class that has one, splice the words in.
/// The final assignment is computed on the returned texts.
DenoiseResult run_denoiser(const std::vector<text::ClassText>& noisy_texts,
                           std::span<const embedding::VisualSample> visuals,
                           const corpus::CorpusIndex& index,
                           const embedding::EmbeddingProvider& provider, const DecodeConfig& config);

/// Jensen lower bound sum_j sum_z Q_j(z) log(p_j(z) / Q_j(z)), where
/// joint[j][z] is the (unnormalized) joint probability of sample j taking
/// class z. Terms with Q_j(z) == 0 contribute 0. ShapeError on mismatched
/// shapes or rows of Q that are not probability vectors.
double assignment_lower_bound(const std::vector<std::vector<double>>& joint,
                              const std::vector<std::vector<double>>& q);

/// Row-normalized joint: the Q that attains the bound.
std::vector<std::vector<double>> posterior(const std::vector<std::vector<double>>& joint);

}  // namespace denoiser::core
