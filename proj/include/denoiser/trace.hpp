#pragma once

#include <string>

#include "denoiser/denoiser.hpp"

namespace denoiser::core {

/// JSON echo of a decode configuration (one object).
std::string format_config_json(const DecodeConfig& config);

/// Full decode trace as a JSON document; layout in schemas/trace.schema.json.
std::string format_trace_json(const DenoiseResult& result, const DecodeConfig& config,
                              const std::vector<text::ClassText>& noisy_texts);

}  // namespace denoiser::core
