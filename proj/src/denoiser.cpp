#include "denoiser/denoiser.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "denoiser/errors.hpp"
#include "denoiser/random.hpp"

namespace denoiser::core {

using embedding::EmbeddingProvider;
using embedding::EmbeddingVec;
using embedding::VisualSample;
using text::ClassText;
using text::WordCandidate;

std::string_view to_string(AssignmentMode mode) noexcept {
  return mode == AssignmentMode::ClassText ? "class_text" : "candidate_max";
}

std::string_view to_string(Weighting weighting) noexcept {
  switch (weighting) {
    case Weighting::IntraOnly: return "intra_only";
    case Weighting::InterOnly: return "inter_only";
    case Weighting::Combined: return "combined";
  }
  return "combined";
}

AssignmentMode parse_assignment_mode(std::string_view name) {
  if (name == "class_text") return AssignmentMode::ClassText;
  if (name == "candidate_max") return AssignmentMode::CandidateMax;
  throw ConfigError("unknown assignment mode \"" + std::string(name) + "\"");
}

Weighting parse_weighting(std::string_view name) {
  for (Weighting w : {Weighting::IntraOnly, Weighting::InterOnly, Weighting::Combined}) {
    if (to_string(w) == name) return w;
  }
  throw ConfigError("unknown weighting \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------

Assignment Assignment::from_labels(std::vector<std::size_t> labels, std::size_t n_classes,
                                   AssignmentMode mode) {
  Assignment a;
  a.groups.resize(n_classes);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= n_classes) throw ShapeError("label out of range");
    a.groups[labels[j]].push_back(j);
  }
  a.labels = std::move(labels);
  a.mode = mode;
  return a;
}

std::vector<std::size_t> Assignment::group_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(g.size());
  return sizes;
}

// ---------------------------------------------------------------------------

TemperatureSchedule::TemperatureSchedule(Kind kind, double start, double end)
    : kind_(kind), start_(start), end_(end) {
  if (!(start > 0.0) || !(end > 0.0) || !std::isfinite(start) || !std::isfinite(end)) {
    throw ConfigError("temperatures must be positive and finite");
  }
}

TemperatureSchedule TemperatureSchedule::constant(double value) {
  return TemperatureSchedule(Kind::Constant, value, value);
}

TemperatureSchedule TemperatureSchedule::linear(double start, double end) {
  return TemperatureSchedule(Kind::Linear, start, end);
}

namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("bad number \"" + std::string(s) + "\" in " + std::string(what));
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

TemperatureSchedule TemperatureSchedule::parse(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const auto colon = spec.find(':', pos);
    parts.push_back(spec.substr(pos, colon == std::string_view::npos ? spec.npos : colon - pos));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts[0] == "constant" && parts.size() == 2) return constant(parse_double(parts[1], spec));
  if (parts[0] == "linear" && parts.size() == 3) {
    return linear(parse_double(parts[1], spec), parse_double(parts[2], spec));
  }
  throw ConfigError("schedule must be constant:V or linear:START:END, got \"" + std::string(spec) + "\"");
}

double TemperatureSchedule::at(std::size_t step, std::size_t total_steps) const noexcept {
  if (kind_ == Kind::Constant) return start_;
  if (total_steps <= 1) return end_;
  const double t = static_cast<double>(std::min(step, total_steps - 1)) /
                   static_cast<double>(total_steps - 1);
  return start_ + (end_ - start_) * t;
}

std::string TemperatureSchedule::to_string() const {
  if (kind_ == Kind::Constant) return "constant:" + format_number(start_);
  return "linear:" + format_number(start_) + ":" + format_number(end_);
}

void DecodeConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (passes < 1) throw ConfigError("passes must be at least 1");
  if (!(max_visual_fraction > 0.0 && max_visual_fraction <= 1.0)) {
    throw ConfigError("max_visual_fraction must lie in (0, 1]");
  }
  if (!std::isfinite(similarity_scale)) throw ConfigError("similarity_scale must be finite");
}

// ---------------------------------------------------------------------------

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - peak);
  const double log_norm = peak + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

namespace {

std::vector<EmbeddingVec> encode_all(const std::vector<ClassText>& texts, const EmbeddingProvider& provider) {
  std::vector<EmbeddingVec> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(provider.encode_text(t));
  return out;
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> distance_logits(std::span<const WordCandidate> candidates, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("temperature must be positive");
  if (candidates.empty()) throw ConfigError("no candidates to weight");
  std::vector<double> logits;
  logits.reserve(candidates.size());
  for (const auto& c : candidates) logits.push_back(-static_cast<double>(c.distance) / lambda);
  return logits;
}

std::vector<std::size_t> sample_voters(const std::vector<std::size_t>& group, double fraction,
                                       std::uint64_t seed) {
  if (fraction >= 1.0 || group.empty()) return group;
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(group.size()))));
  std::vector<std::size_t> pool = group;
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
  }
  pool.resize(keep);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Assignment classify(std::span<const VisualSample> visuals, const std::vector<ClassText>& texts,
                    const EmbeddingProvider& provider) {
  if (texts.empty()) throw ConfigError("classification needs at least one class");
  const auto class_vecs = encode_all(texts, provider);
  std::vector<std::size_t> labels(visuals.size());
  std::vector<double> sims(texts.size());
  for (std::size_t j = 0; j < visuals.size(); ++j) {
    for (std::size_t c = 0; c < texts.size(); ++c) {
      sims[c] = embedding::cosine_similarity(visuals[j].vec, class_vecs[c]);
    }
    labels[j] = argmax_first(sims);
  }
  return Assignment::from_labels(std::move(labels), texts.size(), AssignmentMode::ClassText);
}

Assignment classify_candidate_max(std::span<const VisualSample> visuals,
                                  const std::vector<std::vector<ClassText>>& candidate_texts,
                                  const EmbeddingProvider& provider) {
  if (candidate_texts.empty()) throw ConfigError("classification needs at least one class");
  bool all_single = true;
  for (const auto& set : candidate_texts) {
    if (set.empty()) throw ConfigError("class has no candidate texts");
    all_single = all_single && set.size() == 1;
  }
  if (all_single) {
    std::vector<ClassText> texts;
    for (const auto& set : candidate_texts) texts.push_back(set.front());
    Assignment a = classify(visuals, texts, provider);
    a.mode = AssignmentMode::CandidateMax;
    return a;
  }

  std::vector<std::vector<EmbeddingVec>> vecs;
  vecs.reserve(candidate_texts.size());
  for (const auto& set : candidate_texts) vecs.push_back(encode_all(set, provider));

  std::vector<std::size_t> labels(visuals.size());
  std::vector<double> class_scores(candidate_texts.size());
  std::vector<double> sims;
  for (std::size_t j = 0; j < visuals.size(); ++j) {
    for (std::size_t c = 0; c < vecs.size(); ++c) {
      sims.clear();
      for (const auto& v : vecs[c]) sims.push_back(embedding::cosine_similarity(visuals[j].vec, v));
      const auto probs = softmax(sims);
      class_scores[c] = *std::max_element(probs.begin(), probs.end());
    }
    labels[j] = argmax_first(class_scores);
  }
  return Assignment::from_labels(std::move(labels), candidate_texts.size(), AssignmentMode::CandidateMax);
}

std::vector<double> intra_weight(std::span<const WordCandidate> candidates, double lambda) {
  return softmax(distance_logits(candidates, lambda));
}

std::vector<double> intra_log_weight(std::span<const WordCandidate> candidates, double lambda) {
  return log_softmax(distance_logits(candidates, lambda));
}

std::vector<double> inter_weight(const VisualSample& sample, const std::vector<ClassText>& candidate_texts,
                                 const EmbeddingProvider& provider, double similarity_scale) {
  if (candidate_texts.empty()) throw ConfigError("no candidate texts to weight");
  std::vector<double> logits;
  logits.reserve(candidate_texts.size());
  for (const auto& t : candidate_texts) {
    logits.push_back(similarity_scale * embedding::cosine_similarity(sample.vec, provider.encode_text(t)));
  }
  return softmax(logits);
}

std::vector<ClassText> candidate_texts(const ClassText& current, std::size_t word_index,
                                       std::span<const WordCandidate> candidates) {
  std::vector<ClassText> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(text::with_word(current, word_index, c.word));
  return out;
}

WordDecision decode_word(std::size_t class_index, const DecodeState& state, const Assignment& assignment,
                         std::span<const VisualSample> visuals, const corpus::CorpusIndex& index,
                         const EmbeddingProvider& provider, const DecodeConfig& config,
                         std::size_t global_step) {
  const ClassText& current = state.texts.at(class_index);
  const ClassText& original = state.original_noisy.at(class_index);
  if (state.step < 1 || state.step > current.size() || current.size() != original.size()) {
    throw ConfigError("decode step outside the class text");
  }

  WordDecision d;
  d.class_index = class_index;
  d.word_index = state.step - 1;
  d.source_word = original.words[d.word_index];
  d.candidates = index.propose(d.source_word, config.k).candidates;
  const std::size_t n = d.candidates.size();
  d.scores.assign(n, 0.0);

  if (config.weighting != Weighting::InterOnly) {
    d.intra_log = intra_log_weight(d.candidates, state.lambda);
    if (config.frequency_prior) {
      const auto total = static_cast<double>(index.corpus().total_frequency());
      for (std::size_t k = 0; k < n; ++k) {
        d.intra_log[k] -= std::log(static_cast<double>(d.candidates[k].frequency) / total);
      }
    }
    for (std::size_t k = 0; k < n; ++k) d.scores[k] += d.intra_log[k];
  }

  if (config.weighting != Weighting::IntraOnly && class_index < assignment.groups.size()) {
    const std::uint64_t seed =
        derive_seed(derive_seed(config.subsample_seed, class_index), global_step);
    const auto voters = sample_voters(assignment.groups[class_index], config.max_visual_fraction, seed);
    d.voters = voters.size();
    if (!voters.empty()) {
      const auto vecs = encode_all(candidate_texts(current, d.word_index, d.candidates), provider);
      d.inter_log.assign(n, 0.0);
      std::vector<double> logits(n);
      for (std::size_t j : voters) {
        const VisualSample& sample = visuals[j];
        for (std::size_t k = 0; k < n; ++k) {
          logits[k] = config.similarity_scale * embedding::cosine_similarity(sample.vec, vecs[k]);
        }
        const auto lp = log_softmax(logits);
        for (std::size_t k = 0; k < n; ++k) d.inter_log[k] += lp[k];
      }
      if (config.mean_log) {
        for (double& x : d.inter_log) x /= static_cast<double>(voters.size());
      }
      for (std::size_t k = 0; k < n; ++k) d.scores[k] += d.inter_log[k];
    }
  }

  d.chosen = argmax_first(d.scores);
  return d;
}

DenoiseResult run_denoiser(const std::vector<ClassText>& noisy_texts, std::span<const VisualSample> visuals,
                           const corpus::CorpusIndex& index, const EmbeddingProvider& provider,
                           const DecodeConfig& config) {
  config.validate();
  if (noisy_texts.empty()) throw ConfigError("denoising needs at least one class");

  DecodeState state;
  state.texts = noisy_texts;
  state.original_noisy = noisy_texts;
  std::size_t n_max = 0;
  for (const auto& t : noisy_texts) n_max = std::max(n_max, t.size());

  DenoiseResult result;
  const std::size_t total_steps = config.passes * n_max;
  std::size_t global_step = 0;
  for (std::size_t pass = 1; pass <= config.passes; ++pass) {
    for (std::size_t i = 1; i <= n_max; ++i, ++global_step) {
      Assignment assignment;
      if (config.mode == AssignmentMode::ClassText) {
        assignment = classify(visuals, state.texts, provider);
      } else {
        std::vector<std::vector<ClassText>> sets;
        sets.reserve(state.texts.size());
        for (std::size_t c = 0; c < state.texts.size(); ++c) {
          // Fully decoded classes offer alternatives for their last word.
          const std::size_t w = std::min(i, state.texts[c].size()) - 1;
          const auto proposals = index.propose(state.original_noisy[c].words[w], config.k);
          sets.push_back(candidate_texts(state.texts[c], w, proposals.candidates));
        }
        assignment = classify_candidate_max(visuals, sets, provider);
      }

      state.step = i;
      state.lambda = config.schedule.at(global_step, total_steps);

      StepTrace trace;
      trace.pass = pass;
      trace.step = i;
      trace.global_step = global_step;
      trace.lambda = state.lambda;
      trace.assignment_sizes = assignment.group_sizes();
      for (std::size_t c = 0; c < state.texts.size(); ++c) {
        if (state.texts[c].size() < i) continue;
        trace.decisions.push_back(
            decode_word(c, state, assignment, visuals, index, provider, config, global_step));
      }
      for (const auto& d : trace.decisions) {
        state.texts[d.class_index].words[d.word_index] = d.chosen_candidate().word;
      }
      result.trace.push_back(std::move(trace));
    }
  }
  result.final_assignment = classify(visuals, state.texts, provider);
  result.texts = std::move(state.texts);
  return result;
}

// ---------------------------------------------------------------------------

double assignment_lower_bound(const std::vector<std::vector<double>>& joint,
                              const std::vector<std::vector<double>>& q) {
  if (joint.size() != q.size()) throw ShapeError("joint and Q have different sample counts");
  double bound = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (joint[j].size() != q[j].size()) throw ShapeError("joint and Q rows differ in length");
    double row_sum = 0.0;
    for (double x : q[j]) {
      if (!(x >= 0.0 && x <= 1.0)) throw ShapeError("Q entries must lie in [0, 1]");
      row_sum += x;
    }
    if (std::abs(row_sum - 1.0) > 1e-9) throw ShapeError("Q row is not normalized");
    for (std::size_t z = 0; z < q[j].size(); ++z) {
      if (q[j][z] == 0.0) continue;
      if (joint[j][z] < 0.0) throw ShapeError("joint probabilities must be non-negative");
      bound += q[j][z] * std::log(joint[j][z] / q[j][z]);
    }
  }
  return bound;
}

std::vector<std::vector<double>> posterior(const std::vector<std::vector<double>>& joint) {
  std::vector<std::vector<double>> out;
  out.reserve(joint.size());
  for (const auto& row : joint) {
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(sum > 0.0)) throw ShapeError("joint row has no mass");
    std::vector<double> p(row.size());
    for (std::size_t z = 0; z < row.size(); ++z) p[z] = row[z] / sum;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace denoiser::core
