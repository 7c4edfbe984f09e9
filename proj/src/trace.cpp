#include "denoiser/trace.hpp"

#include "json.hpp"

namespace denoiser::core {

using nlohmann::json;

namespace {

json config_object(const DecodeConfig& config) {
  return {{"k", config.k},
          {"schedule", config.schedule.to_string()},
          {"passes", config.passes},
          {"weighting", to_string(config.weighting)},
          {"mode", to_string(config.mode)},
          {"similarity_scale", config.similarity_scale},
          {"max_visual_fraction", config.max_visual_fraction},
          {"mean_log", config.mean_log},
          {"frequency_prior", config.frequency_prior},
          {"subsample_seed", config.subsample_seed}};
}

json optional_array(const std::vector<double>& values, std::size_t k) {
  if (values.empty()) return nullptr;
  return values.at(k);
}

}  // namespace

std::string format_config_json(const DecodeConfig& config) { return config_object(config).dump(); }

std::string format_trace_json(const DenoiseResult& result, const DecodeConfig& config,
                              const std::vector<text::ClassText>& noisy_texts) {
  json steps = json::array();
  for (const auto& step : result.trace) {
    json classes = json::array();
    for (const auto& d : step.decisions) {
      json candidates = json::array();
      for (std::size_t k = 0; k < d.candidates.size(); ++k) {
        const auto& c = d.candidates[k];
        candidates.push_back({{"word", c.word},
                              {"distance", c.distance},
                              {"frequency", c.frequency},
                              {"intra_log", optional_array(d.intra_log, k)},
                              {"inter_log", optional_array(d.inter_log, k)},
                              {"score", d.scores.at(k)}});
      }
      classes.push_back({{"class_index", d.class_index},
                         {"word_index", d.word_index},
                         {"source_word", d.source_word},
                         {"chosen", d.chosen_candidate().word},
                         {"voters", d.voters},
                         {"candidates", std::move(candidates)}});
    }
    steps.push_back({{"pass", step.pass},
                     {"step", step.step},
                     {"global_step", step.global_step},
                     {"lambda", step.lambda},
                     {"assignment_sizes", step.assignment_sizes},
                     {"classes", std::move(classes)}});
  }
  json noisy = json::array();
  for (const auto& t : noisy_texts) noisy.push_back(t.render());
  json final_texts = json::array();
  for (const auto& t : result.texts) final_texts.push_back(t.render());

  json doc = {{"config", config_object(config)},
              {"noisy", std::move(noisy)},
              {"steps", std::move(steps)},
              {"final", std::move(final_texts)},
              {"final_assignment_sizes", result.final_assignment.group_sizes()}};
  return doc.dump(2) + "\n";
}

}  // namespace denoiser::core
