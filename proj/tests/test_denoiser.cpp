#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "denoiser/corpus.hpp"
#include "denoiser/denoiser.hpp"
#include "denoiser/embedding.hpp"
#include "denoiser/errors.hpp"
#include "denoiser/eval.hpp"
#include "denoiser/random.hpp"

using namespace denoiser;
using namespace denoiser::core;
using text::ClassText;
using text::WordCandidate;

namespace {

ClassText t(const char* s, int id = 0) { return text::tokenize(s, id); }

corpus::CorpusIndex bird_index() {
  return corpus::CorpusIndex(corpus::Corpus::from_entries(
      {{"bird", 120}, {"board", 300}, {"beard", 40}, {"red", 200}, {"fox", 90}, {"box", 150}}));
}

// One noisy class "boird" whose visual samples show a bird.
struct BirdScene {
  embedding::LexiconEmbedder provider{13, 64};
  corpus::CorpusIndex index = bird_index();
  std::vector<embedding::VisualSample> visuals =
      embedding::generate_world({t("bird")}, provider, 25, 0.1, 5);
  std::vector<ClassText> noisy{t("boird")};

  DecodeState state(double lambda) const {
    DecodeState s;
    s.step = 1;
    s.texts = noisy;
    s.original_noisy = noisy;
    s.lambda = lambda;
    return s;
  }
  Assignment all_to_first() const {
    return Assignment::from_labels(std::vector<std::size_t>(visuals.size(), 0), 1, AssignmentMode::ClassText);
  }
};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(Schedule, LinearEndpointsAndSingleStep) {
  const auto s = TemperatureSchedule::linear(0.01, 1.0);
  EXPECT_DOUBLE_EQ(s.at(0, 3), 0.01);
  EXPECT_DOUBLE_EQ(s.at(1, 3), 0.505);
  EXPECT_DOUBLE_EQ(s.at(2, 3), 1.0);
  EXPECT_DOUBLE_EQ(s.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(TemperatureSchedule::constant(0.5).at(7, 9), 0.5);
}

TEST(Schedule, ParseAndPrint) {
  const auto s = TemperatureSchedule::parse("linear:0.01:1");
  EXPECT_EQ(s.kind(), TemperatureSchedule::Kind::Linear);
  EXPECT_EQ(s.to_string(), "linear:0.01:1");
  EXPECT_EQ(TemperatureSchedule::parse("constant:2.5").to_string(), "constant:2.5");
  EXPECT_THROW(TemperatureSchedule::parse("cosine:1:2"), ConfigError);
  EXPECT_THROW(TemperatureSchedule::parse("linear:0:1"), ConfigError);
  EXPECT_THROW(TemperatureSchedule::parse("constant:x"), ConfigError);
}

TEST(Config, Validation) {
  DecodeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_visual_fraction = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.passes = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_weighting("both"), ConfigError);
  EXPECT_EQ(parse_assignment_mode("candidate_max"), AssignmentMode::CandidateMax);
}

TEST(Weights, IntraWeightKnownValues) {
  const std::vector<WordCandidate> cands{{"a", 1, 1}, {"b", 2, 1}};
  const auto w = intra_weight(cands, 1.0);
  EXPECT_NEAR(w[0], 0.7311, 1e-4);
  EXPECT_NEAR(w[1], 0.2689, 1e-4);
  const auto flat = intra_weight(cands, 1e7);
  EXPECT_NEAR(flat[0], 0.5, 1e-5);
  EXPECT_THROW(intra_weight(cands, 0.0), ConfigError);
}

TEST(Weights, SoftmaxNormalizesAndIsShiftStable) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(1 + rng.uniform_index(30));
    for (auto& v : x) v = 200.0 * (rng.uniform01() - 0.5);
    const auto p = softmax(x);
    EXPECT_NEAR(sum(p), 1.0, 1e-9);
    const auto lp = log_softmax(x);
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(std::exp(lp[k]), p[k], 1e-12);
    auto shifted = x;
    for (auto& v : shifted) v += 1000.0;
    const auto q = softmax(shifted);
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
  }
}

TEST(Weights, InterWeightSumsToOne) {
  BirdScene s;
  const auto texts = candidate_texts(s.noisy[0], 0, s.index.propose("boird", 4).candidates);
  const auto w = inter_weight(s.visuals[0], texts, s.provider, 1.0);
  EXPECT_NEAR(sum(w), 1.0, 1e-9);
}

TEST(Classify, TiesGoToTheFirstClass) {
  const auto v = embedding::EmbeddingVec::normalized({1.0, 1.0});
  const std::vector<embedding::VisualSample> visuals{{0, v, std::nullopt}};
  embedding::EmbeddingStore store;
  store.dimension = 2;
  store.texts.emplace("left", embedding::EmbeddingVec::normalized({1.0, 0.0}));
  store.texts.emplace("right", embedding::EmbeddingVec::normalized({0.0, 1.0}));
  const auto provider = store.provider();
  const auto a = classify(visuals, {t("right", 0), t("left", 1)}, *provider);
  EXPECT_EQ(a.labels[0], 0u);
  const auto b = classify(visuals, {t("left", 0), t("right", 1)}, *provider);
  EXPECT_EQ(b.labels[0], 0u);
}

TEST(Classify, CandidateMaxWithSingleCandidatesMatchesClassify) {
  BirdScene s;
  const std::vector<ClassText> texts{t("bird", 0), t("board", 1), t("red fox", 2)};
  const auto plain = classify(s.visuals, texts, s.provider);
  const auto cm = classify_candidate_max(s.visuals, {{texts[0]}, {texts[1]}, {texts[2]}}, s.provider);
  EXPECT_EQ(cm.labels, plain.labels);
  EXPECT_EQ(cm.mode, AssignmentMode::CandidateMax);
  EXPECT_THROW(classify_candidate_max(s.visuals, {{texts[0]}, {}}, s.provider), ConfigError);
}

TEST(Assignment, LabelsOutOfRangeAreRejected) {
  EXPECT_THROW(Assignment::from_labels({0, 3}, 2, AssignmentMode::ClassText), ShapeError);
  const auto a = Assignment::from_labels({1, 0, 1}, 3, AssignmentMode::ClassText);
  EXPECT_EQ(a.group_sizes(), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(a.groups[1], (std::vector<std::size_t>{0, 2}));
}

TEST(DecodeWord, VisionResolvesBoirdToBird) {
  BirdScene s;
  DecodeConfig config;
  config.k = 3;
  const auto d = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  ASSERT_EQ(d.candidates[0].word, "board");  // proposal order puts the frequent word first
  EXPECT_EQ(d.chosen_candidate().word, "bird");
  EXPECT_EQ(d.voters, 25u);
  EXPECT_EQ(d.source_word, "boird");
  // scores decompose into the two logged terms
  for (std::size_t k = 0; k < d.candidates.size(); ++k)
    EXPECT_NEAR(d.scores[k], d.intra_log[k] + d.inter_log[k], 1e-12);
}

TEST(DecodeWord, TextOnlyEvidenceKeepsTheProposalOrder) {
  BirdScene s;
  DecodeConfig config;
  config.k = 3;
  config.weighting = Weighting::IntraOnly;
  const auto d = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  EXPECT_EQ(d.chosen_candidate().word, "board");
  EXPECT_TRUE(d.inter_log.empty());
  EXPECT_EQ(d.voters, 0u);

  config.weighting = Weighting::InterOnly;
  const auto e = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  EXPECT_EQ(e.chosen_candidate().word, "bird");
  EXPECT_TRUE(e.intra_log.empty());
}

TEST(DecodeWord, FrequencyBaselinePicksTheCommonerWord) {
  BirdScene s;
  const auto out = eval::frequency_baseline(s.noisy, s.index);
  EXPECT_EQ(out[0].render(), "board");
}

TEST(DecodeWord, NoVotersMeansIntraOnly) {
  BirdScene s;
  DecodeConfig config;
  config.k = 3;
  const auto empty = Assignment::from_labels(std::vector<std::size_t>(s.visuals.size(), 1), 2,
                                             AssignmentMode::ClassText);
  const auto d = decode_word(0, s.state(1.0), empty, s.visuals, s.index, s.provider, config);
  EXPECT_EQ(d.voters, 0u);
  EXPECT_EQ(d.chosen_candidate().word, "board");
}

TEST(DecodeWord, VisualFractionLimitsVoters) {
  BirdScene s;
  DecodeConfig config;
  config.k = 3;
  config.max_visual_fraction = 0.1;
  const auto d = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config, 4);
  EXPECT_EQ(d.voters, 3u);  // ceil(0.1 * 25)
  const auto again = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config, 4);
  EXPECT_EQ(d.inter_log, again.inter_log);
}

TEST(DecodeWord, MeanLogDividesByVoters) {
  BirdScene s;
  DecodeConfig config;
  config.k = 3;
  const auto summed = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  config.mean_log = true;
  const auto mean = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(mean.inter_log[k] * 25.0, summed.inter_log[k], 1e-9);
}

TEST(DecodeWord, FrequencyPriorSubtractsLogPrior) {
  BirdScene s;
  DecodeConfig config;
  config.k = 2;
  config.weighting = Weighting::IntraOnly;
  const auto plain = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  config.frequency_prior = true;
  const auto prior = decode_word(0, s.state(1.0), s.all_to_first(), s.visuals, s.index, s.provider, config);
  const double total = static_cast<double>(s.index.corpus().total_frequency());
  for (std::size_t k = 0; k < 2; ++k) {
    const double f = static_cast<double>(plain.candidates[k].frequency);
    EXPECT_NEAR(prior.intra_log[k], plain.intra_log[k] - std::log(f / total), 1e-12);
  }
  EXPECT_EQ(prior.chosen_candidate().word, "bird");  // rarer of the two distance-1 words
}

TEST(Denoiser, CleanInputIsAFixedPoint) {
  embedding::LexiconEmbedder provider(13, 64);
  const auto index = bird_index();
  const std::vector<ClassText> clean{t("bird", 0), t("red fox", 1), t("board", 2)};
  const auto visuals = embedding::generate_world(clean, provider, 5, 0.0, 1);
  const auto r = run_denoiser(clean, visuals, index, provider, {});
  EXPECT_EQ(r.texts, clean);
  std::vector<std::size_t> truth;
  for (const auto& v : visuals) truth.push_back(static_cast<std::size_t>(*v.true_class));
  EXPECT_DOUBLE_EQ(eval::top1_accuracy(r.final_assignment, truth), 100.0);
}

TEST(Denoiser, TraceFollowsTheSchedule) {
  BirdScene s;
  const std::vector<ClassText> noisy{t("boird", 0), t("rd fx", 1)};
  DecodeConfig config;
  config.passes = 2;
  const auto r = run_denoiser(noisy, s.visuals, s.index, s.provider, config);
  ASSERT_EQ(r.trace.size(), 4u);
  EXPECT_DOUBLE_EQ(r.trace.front().lambda, 0.01);
  EXPECT_DOUBLE_EQ(r.trace.back().lambda, 1.0);
  EXPECT_EQ(r.trace[0].decisions.size(), 2u);
  EXPECT_EQ(r.trace[1].decisions.size(), 1u);  // only the two-word class has a second word
  EXPECT_EQ(r.trace[3].pass, 2u);
  EXPECT_EQ(r.trace[3].step, 2u);
  EXPECT_EQ(r.trace[3].global_step, 3u);
  // proposals always come from the original noisy word
  EXPECT_EQ(r.trace[2].decisions[0].source_word, "boird");
  const auto again = run_denoiser(noisy, s.visuals, s.index, s.provider, config);
  EXPECT_EQ(again.texts, r.texts);
}

TEST(Denoiser, CandidateMaxModeRuns) {
  BirdScene s;
  DecodeConfig config;
  config.mode = AssignmentMode::CandidateMax;
  const auto r = run_denoiser({t("boird", 0), t("rd fx", 1)}, s.visuals, s.index, s.provider, config);
  EXPECT_EQ(r.texts[0].render(), "bird");
  EXPECT_EQ(r.trace.size(), 2u);
}

TEST(Bound, PosteriorMaximizesTheJensenBound) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> joint(5, std::vector<double>(4));
    for (auto& row : joint)
      for (auto& x : row) x = rng.uniform01() + 1e-3;
    const auto q_star = posterior(joint);
    const double best = assignment_lower_bound(joint, q_star);
    // at the posterior the bound equals the log evidence
    double evidence = 0.0;
    for (const auto& row : joint) evidence += std::log(sum(row));
    EXPECT_NEAR(best, evidence, 1e-9);
    for (int i = 0; i < 200; ++i) {
      std::vector<std::vector<double>> q(5, std::vector<double>(4));
      for (auto& row : q) {
        for (auto& x : row) x = rng.uniform01();
        const double s = sum(row);
        for (auto& x : row) x /= s;
      }
      EXPECT_LE(assignment_lower_bound(joint, q), best + 1e-12);
    }
  }
}

TEST(Bound, ZeroEntriesContributeNothing) {
  const std::vector<std::vector<double>> joint{{0.2, 0.0}};
  EXPECT_NEAR(assignment_lower_bound(joint, {{1.0, 0.0}}), std::log(0.2), 1e-12);
  EXPECT_THROW(assignment_lower_bound(joint, {{0.5, 0.6}}), ShapeError);
  EXPECT_THROW(assignment_lower_bound(joint, {{1.0}}), ShapeError);
}

TEST(Bound, PosteriorArgmaxMatchesJointArgmax) {
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::vector<double>> joint(3, std::vector<double>(5));
    for (auto& row : joint)
      for (auto& x : row) x = rng.uniform01();
    const auto q = posterior(joint);
    for (std::size_t j = 0; j < 3; ++j) {
      const auto a = std::max_element(joint[j].begin(), joint[j].end()) - joint[j].begin();
      const auto b = std::max_element(q[j].begin(), q[j].end()) - q[j].begin();
      EXPECT_EQ(a, b);
      EXPECT_NEAR(sum(q[j]), 1.0, 1e-12);
    }
  }
}
