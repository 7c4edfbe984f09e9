#include "denoiser/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <cstdio>
#include <set>
#include <thread>

#include "denoiser/errors.hpp"
#include "denoiser/io.hpp"
#include "denoiser/random.hpp"
#include "denoiser/trace.hpp"
#include "json.hpp"

namespace denoiser::eval {

using nlohmann::json;
using text::ClassText;

namespace {

std::string normalized_label(const ClassText& t) {
  // Re-tokenizing lowercases and collapses whitespace.
  return text::tokenize(t.render()).render();
}

void require_same_classes(std::size_t a, std::size_t b) {
  if (a != b) throw ShapeError("class counts differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

double top1_accuracy(const core::Assignment& assignment, std::span<const std::size_t> truth) {
  if (assignment.labels.size() != truth.size()) throw ShapeError("sample counts differ");
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) correct += assignment.labels[j] == truth[j];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::vector<std::size_t> truth_labels(std::span<const embedding::VisualSample> samples) {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.true_class || *s.true_class < 0) {
      throw ShapeError("sample " + std::to_string(s.sample_id) + " has no true class");
    }
    out.push_back(static_cast<std::size_t>(*s.true_class));
  }
  return out;
}

double label_accuracy(const std::vector<ClassText>& pred, const std::vector<ClassText>& truth) {
  require_same_classes(pred.size(), truth.size());
  if (truth.empty()) return 0.0;
  std::size_t exact = 0;
  for (std::size_t c = 0; c < truth.size(); ++c) exact += normalized_label(pred[c]) == normalized_label(truth[c]);
  return 100.0 * static_cast<double>(exact) / static_cast<double>(truth.size());
}

double semantic_similarity(const std::vector<ClassText>& pred, const std::vector<ClassText>& truth,
                           const embedding::EmbeddingProvider& provider) {
  require_same_classes(pred.size(), truth.size());
  if (truth.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    sum += embedding::cosine_similarity(provider.encode_text(pred[c]), provider.encode_text(truth[c]));
  }
  return 100.0 * sum / static_cast<double>(truth.size());
}

std::vector<ClassText> frequency_baseline(const std::vector<ClassText>& noisy, const corpus::CorpusIndex& index) {
  std::vector<ClassText> out = noisy;
  for (auto& t : out) {
    for (auto& w : t.words) w = index.propose(w, 1).candidates.front().word;
  }
  return out;
}

Report evaluate(const std::vector<ClassText>& truth, const std::vector<ClassText>& pred,
                const std::vector<ClassText>* noisy, std::span<const embedding::VisualSample> samples,
                const embedding::EmbeddingProvider& provider) {
  require_same_classes(pred.size(), truth.size());
  if (noisy) require_same_classes(noisy->size(), truth.size());

  Report r;
  r.label_acc = label_accuracy(pred, truth);
  r.semantic_similarity = semantic_similarity(pred, truth, provider);

  const bool labelled = !samples.empty() && std::all_of(samples.begin(), samples.end(), [&](const auto& s) {
    return s.true_class && *s.true_class >= 0 && static_cast<std::size_t>(*s.true_class) < truth.size();
  });
  if (labelled) {
    const auto labels = truth_labels(samples);
    r.top1_after = top1_accuracy(core::classify(samples, pred, provider), labels);
    if (noisy) r.top1_before = top1_accuracy(core::classify(samples, *noisy, provider), labels);
  }
  if (noisy) {
    try {
      r.realized_noise_rate = noise::perturbation_rate(truth, *noisy);
    } catch (const ShapeError&) {
      // Word counts differ, so no per-character rate exists.
    }
  }

  for (std::size_t c = 0; c < truth.size(); ++c) {
    ClassRow row;
    row.class_id = truth[c].class_id;
    row.truth = truth[c].render();
    row.noisy = noisy ? (*noisy)[c].render() : "";
    row.predicted = pred[c].render();
    row.exact = normalized_label(pred[c]) == normalized_label(truth[c]);
    row.similarity =
        100.0 * embedding::cosine_similarity(provider.encode_text(pred[c]), provider.encode_text(truth[c]));
    r.rows.push_back(std::move(row));
  }
  return r;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_object(const Report& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"class_id", row.class_id},
                    {"truth", row.truth},
                    {"noisy", row.noisy},
                    {"predicted", row.predicted},
                    {"exact", row.exact},
                    {"similarity", row.similarity}});
  }
  return {{"top1_before", optional_number(r.top1_before)},
          {"top1_after", optional_number(r.top1_after)},
          {"label_acc", r.label_acc},
          {"semantic_similarity", r.semantic_similarity},
          {"realized_noise_rate", optional_number(r.realized_noise_rate)},
          {"config", json::parse(r.config_json)},
          {"classes", std::move(rows)}};
}

}  // namespace

std::string format_report_json(const Report& report) { return report_object(report).dump(2) + "\n"; }

// --- synthetic experiments --------------------------------------------------

std::vector<ClassText> draw_classes(const corpus::Corpus& corpus, std::size_t n_classes,
                                    std::size_t words_per_class, std::uint64_t seed) {
  if (n_classes == 0 || words_per_class == 0) throw ConfigError("world needs classes and words");
  const std::size_t needed = n_classes * words_per_class;
  if (needed > corpus.size()) throw ConfigError("corpus too small for the requested world");
  Rng rng(derive_seed(seed, 0));
  std::set<std::size_t> used;
  std::vector<ClassText> classes;
  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassText t;
    t.class_id = static_cast<int>(c);
    while (t.words.size() < words_per_class) {
      const std::size_t idx = rng.uniform_index(corpus.size());
      if (!used.insert(idx).second) continue;
      t.words.push_back(corpus[idx].word);
    }
    classes.push_back(std::move(t));
  }
  return classes;
}

world::World build_world(const corpus::Corpus& corpus, const WorldRecipe& recipe, std::uint64_t seed) {
  return world::generate(draw_classes(corpus, recipe.n_classes, recipe.words_per_class, seed),
                         recipe.provider, recipe.samples_per_class, recipe.sigma, derive_seed(seed, 1));
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Denoiser: return "denoiser";
    case Method::FrequencyBaseline: return "frequency_baseline";
    case Method::Identity: return "identity";
  }
  return "denoiser";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Denoiser, Method::FrequencyBaseline, Method::Identity}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method \"" + std::string(name) + "\"");
}

std::string config_json(const Cell& cell) {
  json doc = {{"world_seed", cell.world_seed},
              {"method", to_string(cell.method)},
              {"noise",
               {{"kind", noise::to_string(cell.noise.kind)},
                {"p", cell.noise.p},
                {"seed", cell.noise.seed},
                {"alphabet", text::to_utf8(cell.noise.alphabet)}}},
              {"decode", json::parse(core::format_config_json(cell.config))}};
  return doc.dump();
}

CellResult run_cell(const world::World& world, const corpus::CorpusIndex& index, const Cell& cell) {
  const auto started = std::chrono::steady_clock::now();
  const auto provider = world::make_provider(world.provider);

  CellResult result;
  result.cell = cell;
  result.noisy = noise::perturb(world.classes, cell.noise);
  switch (cell.method) {
    case Method::Denoiser:
      result.predicted = core::run_denoiser(result.noisy, world.samples, index, *provider, cell.config).texts;
      break;
    case Method::FrequencyBaseline:
      result.predicted = frequency_baseline(result.noisy, index);
      break;
    case Method::Identity:
      result.predicted = result.noisy;
      break;
  }
  result.report = evaluate(world.classes, result.predicted, &result.noisy, world.samples, *provider);
  result.report.config_json = config_json(cell);
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

// --- sweeps -----------------------------------------------------------------

std::size_t SweepGrid::cell_count() const noexcept {
  return world_seeds.size() * methods.size() * kinds.size() * rates.size() * noise_seeds.size() *
         configs.size();
}

namespace {

template <typename T, typename F>
std::vector<T> list_of(const json& doc, const char* key, std::vector<T> fallback, F convert) {
  if (!doc.contains(key)) return fallback;
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw ConfigError(std::string("grid field \"") + key + "\" must be a list");
  std::vector<T> out;
  for (const auto& x : arr) out.push_back(convert(x));
  if (out.empty()) throw ConfigError(std::string("grid field \"") + key + "\" is empty");
  return out;
}

core::DecodeConfig parse_decode_config(const json& doc) {
  core::DecodeConfig c;
  if (!doc.is_object()) throw ConfigError("each grid config must be an object");
  c.k = doc.value("k", c.k);
  if (doc.contains("schedule")) c.schedule = core::TemperatureSchedule::parse(doc.at("schedule").get<std::string>());
  c.passes = doc.value("passes", c.passes);
  if (doc.contains("weighting")) c.weighting = core::parse_weighting(doc.at("weighting").get<std::string>());
  if (doc.contains("mode")) c.mode = core::parse_assignment_mode(doc.at("mode").get<std::string>());
  c.similarity_scale = doc.value("similarity_scale", c.similarity_scale);
  c.max_visual_fraction = doc.value("visual_fraction", c.max_visual_fraction);
  c.mean_log = doc.value("mean_log", c.mean_log);
  c.frequency_prior = doc.value("frequency_prior", c.frequency_prior);
  c.subsample_seed = doc.value("subsample_seed", c.subsample_seed);
  c.validate();
  return c;
}

}  // namespace

SweepGrid parse_grid(const std::string& json_text, const std::filesystem::path& base_dir) {
  SweepGrid g;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw ConfigError("grid must be a JSON object");
    if (!doc.contains("corpus")) throw ConfigError("grid needs a \"corpus\" path");
    g.corpus = base_dir / doc.at("corpus").get<std::string>();
    if (doc.contains("classes_file")) g.classes_file = base_dir / doc.at("classes_file").get<std::string>();

    if (doc.contains("world")) {
      const json& w = doc.at("world");
      g.recipe.n_classes = w.value("classes", g.recipe.n_classes);
      g.recipe.words_per_class = w.value("words_per_class", g.recipe.words_per_class);
      if (w.contains("embedder")) g.recipe.provider.kind = world::parse_embedder_kind(w.at("embedder").get<std::string>());
      g.recipe.provider.dimension = w.value("dim", g.recipe.provider.dimension);
      g.recipe.provider.seed = w.value("embed_seed", g.recipe.provider.seed);
      g.recipe.provider.prompt.prefix = w.value("prefix", std::string{});
      g.recipe.provider.prompt.suffix = w.value("suffix", std::string{});
      g.recipe.samples_per_class = w.value("samples_per_class", g.recipe.samples_per_class);
      g.recipe.sigma = w.value("sigma", g.recipe.sigma);
    }

    g.world_seeds = list_of(doc, "world_seeds", g.world_seeds, [](const json& x) { return x.get<std::uint64_t>(); });
    g.methods = list_of(doc, "methods", g.methods, [](const json& x) { return parse_method(x.get<std::string>()); });
    const json noise_doc = doc.value("noise", json::object());
    g.kinds = list_of(noise_doc, "kinds", g.kinds,
                      [](const json& x) { return noise::parse_noise_kind(x.get<std::string>()); });
    g.rates = list_of(noise_doc, "rates", g.rates, [](const json& x) { return x.get<double>(); });
    g.noise_seeds = list_of(noise_doc, "seeds", g.noise_seeds, [](const json& x) { return x.get<std::uint64_t>(); });
    g.configs = list_of(doc, "configs", g.configs, parse_decode_config);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed grid: ") + e.what());
  }
  for (double p : g.rates) {
    noise::NoiseSpec probe;
    probe.p = p;
    probe.validate();
  }
  if (g.cell_count() == 0) throw ConfigError("grid has no cells");
  return g;
}

SweepGrid load_grid(const std::filesystem::path& path) {
  return parse_grid(io::read_file(path), path.parent_path());
}

std::vector<CellResult> run_sweep(const SweepGrid& grid, const corpus::CorpusIndex& index, std::size_t jobs) {
  if (grid.cell_count() == 0) throw ConfigError("grid has no cells");

  std::vector<world::World> worlds;
  for (std::uint64_t seed : grid.world_seeds) {
    if (grid.classes_file) {
      worlds.push_back(world::generate(text::read_class_list(*grid.classes_file), grid.recipe.provider,
                                       grid.recipe.samples_per_class, grid.recipe.sigma, derive_seed(seed, 1)));
    } else {
      worlds.push_back(build_world(index.corpus(), grid.recipe, seed));
    }
  }

  std::vector<std::pair<std::size_t, Cell>> cells;
  for (std::size_t w = 0; w < grid.world_seeds.size(); ++w) {
    for (Method method : grid.methods) {
      for (noise::NoiseKind kind : grid.kinds) {
        for (double p : grid.rates) {
          for (std::uint64_t seed : grid.noise_seeds) {
            for (const auto& config : grid.configs) {
              Cell cell;
              cell.world_seed = grid.world_seeds[w];
              cell.method = method;
              cell.noise.kind = kind;
              cell.noise.p = p;
              cell.noise.seed = seed;
              cell.config = config;
              cells.emplace_back(w, cell);
            }
          }
        }
      }
    }
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      results[i] = run_cell(worlds[cells[i].first], index, cells[i].second);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, cells.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        try {
          worker();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = cells.size();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_number(const std::optional<double>& v) { return v ? fixed(*v, 4) : ""; }

}  // namespace

std::string format_sweep_csv(const std::vector<CellResult>& rows, bool record_timing) {
  std::string out =
      "world_seed,noise_kind,p,k,schedule,passes,weighting,top1_before,top1_after,label_acc,"
      "semantic_similarity,realized_rate,wall_ms,noise_seed,method,mode,visual_fraction\n";
  for (const auto& r : rows) {
    const Cell& c = r.cell;
    out += std::to_string(c.world_seed) + "," + std::string(noise::to_string(c.noise.kind)) + "," +
           fixed(c.noise.p, 4) + "," + std::to_string(c.config.k) + "," + c.config.schedule.to_string() + "," +
           std::to_string(c.config.passes) + "," + std::string(core::to_string(c.config.weighting)) + "," +
           csv_number(r.report.top1_before) + "," + csv_number(r.report.top1_after) + "," +
           fixed(r.report.label_acc, 4) + "," + fixed(r.report.semantic_similarity, 4) + "," +
           csv_number(r.report.realized_noise_rate) + "," + fixed(record_timing ? r.wall_ms : 0.0, 1) + "," +
           std::to_string(c.noise.seed) + "," + std::string(to_string(c.method)) + "," +
           std::string(core::to_string(c.config.mode)) + "," + fixed(c.config.max_visual_fraction, 4) + "\n";
  }
  return out;
}

std::string format_sweep_json(const std::vector<CellResult>& rows, bool record_timing) {
  json arr = json::array();
  for (const auto& r : rows) {
    json cell = report_object(r.report);
    cell["wall_ms"] = record_timing ? r.wall_ms : 0.0;
    arr.push_back(std::move(cell));
  }
  return arr.dump(2) + "\n";
}

}  // namespace denoiser::eval
