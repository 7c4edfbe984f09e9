// denoiser: command-line front end.
//
//   denoiser gen-world  --classes F --out DIR [--samples-per-class M --sigma S --dim D
//                       --embedder lexicon|trigram --seed N --embed-seed N]
//   denoiser noise      --classes F --p P --kind K --seed N --out F2
//   denoiser denoise    --noisy F --corpus F (--world DIR | --store F) --out DIR [...]
//   denoiser eval       --pred F --truth F (--world DIR | --store F) --out report.json
//   denoiser sweep      --grid F --out DIR
//
// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "denoiser/corpus.hpp"
#include "denoiser/denoiser.hpp"
#include "denoiser/embedding.hpp"
#include "denoiser/errors.hpp"
#include "denoiser/eval.hpp"
#include "denoiser/io.hpp"
#include "denoiser/noise.hpp"
#include "denoiser/trace.hpp"
#include "denoiser/world.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace denoiser;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

void require_dir(const std::string& path, const char* what) {
  if (!fs::is_directory(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

// Visual samples plus the text provider they were embedded with.
struct Embeddings {
  std::shared_ptr<const embedding::EmbeddingProvider> provider;
  std::vector<embedding::VisualSample> samples;
  std::optional<std::vector<text::ClassText>> clean;  // world classes, when known
};

Embeddings load_embeddings(const std::string& world_dir, const std::string& store_path) {
  Embeddings e;
  if (!world_dir.empty()) {
    world::World w = world::read_world(world_dir);
    e.provider = world::make_provider(w.provider);
    e.samples = std::move(w.samples);
    e.clean = std::move(w.classes);
  } else {
    auto store = embedding::load_embedding_store(store_path);
    e.provider = store.provider();
    e.samples = std::move(store.visuals);
  }
  return e;
}

// --- gen-world --------------------------------------------------------------

struct GenWorldArgs {
  std::string classes;
  std::string out;
  std::size_t samples_per_class = 25;
  double sigma = 0.1;
  std::size_t dim = 64;
  std::string embedder = "lexicon";
  std::uint64_t seed = 7;
  std::uint64_t embed_seed = 13;
  std::string prefix;
  std::string suffix;
};

int cmd_gen_world(const GenWorldArgs& a) {
  require_file(a.classes, "class list");
  world::ProviderSpec spec;
  spec.kind = world::parse_embedder_kind(a.embedder);
  spec.dimension = a.dim;
  spec.seed = a.embed_seed;
  spec.prompt = {a.prefix, a.suffix};
  const auto w = world::generate(text::read_class_list(a.classes), spec, a.samples_per_class, a.sigma, a.seed);
  world::write_world(a.out, w);
  std::cerr << "wrote " << w.samples.size() << " visual samples for " << w.classes.size() << " classes to "
            << a.out << "\n";
  return 0;
}

// --- noise ------------------------------------------------------------------

struct NoiseArgs {
  std::string classes;
  std::string out;
  double p = 0.1;
  std::string kind = "mixed";
  std::uint64_t seed = 42;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
};

int cmd_noise(const NoiseArgs& a) {
  require_file(a.classes, "class list");
  noise::NoiseSpec spec;
  spec.p = a.p;
  spec.kind = noise::parse_noise_kind(a.kind);
  spec.seed = a.seed;
  spec.alphabet = text::to_code_points(text::normalize(a.alphabet));
  spec.validate();

  const auto clean = text::read_class_list(a.classes);
  const auto noisy = noise::perturb(clean, spec);
  nlohmann::json sidecar = {{"p", spec.p},
                            {"kind", noise::to_string(spec.kind)},
                            {"seed", spec.seed},
                            {"alphabet", text::to_utf8(spec.alphabet)},
                            {"classes", clean.size()},
                            {"realized_rate", noise::perturbation_rate(clean, noisy)}};
  io::OutputBatch batch;
  batch.stage(a.out, text::format_class_list(noisy));
  batch.stage(a.out + ".json", sidecar.dump(2) + "\n");
  batch.commit();
  return 0;
}

// --- denoise ----------------------------------------------------------------

struct DenoiseArgs {
  std::string noisy;
  std::string corpus;
  std::string world;
  std::string store;
  std::string truth;
  std::string out;
  std::size_t k = 10;
  std::string schedule = "linear:0.01:1";
  std::size_t passes = 1;
  std::string weighting = "combined";
  std::string mode = "class_text";
  double similarity_scale = 1.0;
  double visual_fraction = 1.0;
  bool mean_log = false;
  bool frequency_prior = false;
  std::uint64_t subsample_seed = 0;
  bool verbose = false;
};

int cmd_denoise(const DenoiseArgs& a) {
  require_file(a.noisy, "noisy class list");
  require_file(a.corpus, "corpus file");
  if (a.world.empty() == a.store.empty()) throw ConfigError("give exactly one of --world or --store");
  if (!a.world.empty()) require_dir(a.world, "world directory");
  if (!a.store.empty()) require_file(a.store, "embedding store");
  if (!a.truth.empty()) require_file(a.truth, "truth class list");

  core::DecodeConfig config;
  config.k = a.k;
  config.schedule = core::TemperatureSchedule::parse(a.schedule);
  config.passes = a.passes;
  config.weighting = core::parse_weighting(a.weighting);
  config.mode = core::parse_assignment_mode(a.mode);
  config.similarity_scale = a.similarity_scale;
  config.max_visual_fraction = a.visual_fraction;
  config.mean_log = a.mean_log;
  config.frequency_prior = a.frequency_prior;
  config.subsample_seed = a.subsample_seed;
  config.validate();

  const auto noisy = text::read_class_list(a.noisy);
  const corpus::CorpusIndex index(corpus::load_corpus(a.corpus));
  const Embeddings emb = load_embeddings(a.world, a.store);

  const auto result = core::run_denoiser(noisy, emb.samples, index, *emb.provider, config);
  if (a.verbose) {
    for (const auto& step : result.trace) {
      std::cerr << "pass " << step.pass << " step " << step.step << " lambda " << step.lambda << ":";
      for (const auto& d : step.decisions) std::cerr << " " << d.source_word << "->" << d.chosen_candidate().word;
      std::cerr << "\n";
    }
  }

  std::optional<std::vector<text::ClassText>> truth;
  if (!a.truth.empty()) {
    truth = text::read_class_list(a.truth);
  } else if (emb.clean) {
    truth = emb.clean;
  }

  const fs::path out(a.out);
  io::OutputBatch batch;
  batch.stage(out / "denoised.txt", text::format_class_list(result.texts));
  batch.stage(out / "trace.json", core::format_trace_json(result, config, noisy));
  if (truth) {
    auto report = eval::evaluate(*truth, result.texts, &noisy, emb.samples, *emb.provider);
    report.config_json = core::format_config_json(config);
    batch.stage(out / "report.json", eval::format_report_json(report));
  } else {
    std::cerr << "no ground truth available; report.json not written\n";
  }
  batch.commit();
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string noisy;
  std::string world;
  std::string store;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  require_file(a.pred, "prediction class list");
  require_file(a.truth, "truth class list");
  if (!a.noisy.empty()) require_file(a.noisy, "noisy class list");
  if (a.world.empty() == a.store.empty()) throw ConfigError("give exactly one of --world or --store");
  if (!a.world.empty()) require_dir(a.world, "world directory");
  if (!a.store.empty()) require_file(a.store, "embedding store");

  const auto pred = text::read_class_list(a.pred);
  const auto truth = text::read_class_list(a.truth);
  std::optional<std::vector<text::ClassText>> noisy;
  if (!a.noisy.empty()) noisy = text::read_class_list(a.noisy);
  const Embeddings emb = load_embeddings(a.world, a.store);

  auto report = eval::evaluate(truth, pred, noisy ? &*noisy : nullptr, emb.samples, *emb.provider);
  nlohmann::json config = {{"pred", a.pred}, {"truth", a.truth}};
  report.config_json = config.dump();
  io::write_file_atomic(a.out, eval::format_report_json(report));
  return 0;
}

// --- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string grid;
  std::string out;
  std::size_t jobs = 1;
  bool record_timing = false;
};

int cmd_sweep(const SweepArgs& a) {
  require_file(a.grid, "grid file");
  const auto grid = eval::load_grid(a.grid);
  require_file(grid.corpus.string(), "corpus file");
  if (grid.classes_file) require_file(grid.classes_file->string(), "class list");

  const corpus::CorpusIndex index(corpus::load_corpus(grid.corpus));
  const auto rows = eval::run_sweep(grid, index, a.jobs);
  const fs::path out(a.out);
  io::OutputBatch batch;
  batch.stage(out / "sweep.csv", eval::format_sweep_csv(rows, a.record_timing));
  batch.stage(out / "sweep.json", eval::format_sweep_json(rows, a.record_timing));
  batch.commit();
  std::cerr << "wrote " << rows.size() << " cells to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoise noisy open-vocabulary class labels with visual evidence"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenWorldArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-world", "Generate a seeded synthetic world from a class list");
  gen_cmd->add_option("--classes", gen.classes, "Clean class list")->required();
  gen_cmd->add_option("--out", gen.out, "Output world directory")->required();
  gen_cmd->add_option("--samples-per-class", gen.samples_per_class, "Visual samples per class")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sigma", gen.sigma, "Gaussian scatter around each class embedding")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--dim", gen.dim, "Embedding dimension");
  gen_cmd->add_option("--embedder", gen.embedder, "Text embedder")->check(CLI::IsMember({"lexicon", "trigram"}));
  gen_cmd->add_option("--seed", gen.seed, "Seed for the visual samples");
  gen_cmd->add_option("--embed-seed", gen.embed_seed, "Seed for the lexicon embedder");
  gen_cmd->add_option("--prefix", gen.prefix, "Prompt words placed before every class text");
  gen_cmd->add_option("--suffix", gen.suffix, "Prompt words placed after every class text");

  NoiseArgs noise_args;
  auto* noise_cmd = app.add_subcommand("noise", "Perturb a class list with character-level noise");
  noise_cmd->add_option("--classes", noise_args.classes, "Clean class list")->required();
  noise_cmd->add_option("--out", noise_args.out, "Noisy class list (sidecar written to OUT.json)")->required();
  noise_cmd->add_option("--p", noise_args.p, "Per-character noise probability")->check(CLI::Range(0.0, 1.0));
  noise_cmd->add_option("--kind", noise_args.kind, "Noise type")
      ->check(CLI::IsMember({"substitute", "insert", "delete", "mixed"}));
  noise_cmd->add_option("--seed", noise_args.seed, "Noise seed");
  noise_cmd->add_option("--alphabet", noise_args.alphabet, "Characters used for substitutions and insertions");

  DenoiseArgs den;
  auto* den_cmd = app.add_subcommand("denoise", "Correct a noisy class list");
  den_cmd->add_option("--noisy", den.noisy, "Noisy class list")->required();
  den_cmd->add_option("--corpus", den.corpus, "Corpus file (word<TAB>frequency)")->required();
  auto* world_opt = den_cmd->add_option("--world", den.world, "World directory from gen-world");
  auto* store_opt = den_cmd->add_option("--store", den.store, "Embedding store (JSONL)");
  world_opt->excludes(store_opt);
  den_cmd->add_option("--truth", den.truth, "Clean class list for the report (defaults to the world's)");
  den_cmd->add_option("--out", den.out, "Output directory")->required();
  den_cmd->add_option("--k", den.k, "Text candidates proposed per word")->check(CLI::PositiveNumber);
  den_cmd->add_option("--schedule", den.schedule, "Temperature schedule: linear:START:END or constant:V");
  den_cmd->add_option("--passes", den.passes, "Full decoding passes")->check(CLI::PositiveNumber);
  den_cmd->add_option("--weighting", den.weighting, "Candidate weighting")
      ->check(CLI::IsMember({"combined", "intra_only", "inter_only"}));
  den_cmd->add_option("--mode", den.mode, "Assignment rule")->check(CLI::IsMember({"class_text", "candidate_max"}));
  den_cmd->add_option("--similarity-scale", den.similarity_scale, "Multiplier on cosine similarities");
  den_cmd->add_option("--visual-fraction", den.visual_fraction, "Fraction of assigned samples allowed to vote")
      ->check(CLI::Range(0.0, 1.0));
  den_cmd->add_flag("--mean-log", den.mean_log, "Average instead of sum the per-sample log votes");
  den_cmd->add_flag("--frequency-prior", den.frequency_prior, "Divide the error model by word frequency");
  den_cmd->add_option("--subsample-seed", den.subsample_seed, "Seed for the voter subsample");
  den_cmd->add_flag("--verbose", den.verbose, "Log one line per decoding step");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted class texts");
  eval_cmd->add_option("--pred", ev.pred, "Predicted class list")->required();
  eval_cmd->add_option("--truth", ev.truth, "Clean class list")->required();
  eval_cmd->add_option("--noisy", ev.noisy, "Noisy class list, for the before/after Top-1");
  auto* ev_world = eval_cmd->add_option("--world", ev.world, "World directory");
  auto* ev_store = eval_cmd->add_option("--store", ev.store, "Embedding store (JSONL)");
  ev_world->excludes(ev_store);
  eval_cmd->add_option("--out", ev.out, "Report path")->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid");
  sweep_cmd->add_option("--grid", sw.grid, "Grid configuration (JSON)")->required();
  sweep_cmd->add_option("--out", sw.out, "Output directory")->required();
  sweep_cmd->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--record-timing", sw.record_timing, "Write real wall_ms values (breaks byte-identity)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_world(gen);
    if (noise_cmd->parsed()) return cmd_noise(noise_args);
    if (den_cmd->parsed()) return cmd_denoise(den);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (sweep_cmd->parsed()) return cmd_sweep(sw);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
