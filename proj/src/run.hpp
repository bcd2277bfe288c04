#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "core.hpp"
#include "noise.hpp"
#include "spike.hpp"

namespace spikedim {

// Fills in every default so the result fully describes the run.  The
// returned object is what gets written as manifest.json: no output
// directory, no timestamps, nothing machine-specific.  Resolving an
// already-resolved config is a no-op, which is what makes reruns
// reproduce a directory byte for byte.
nlohmann::json resolve_config(const nlohmann::json& config);

// Executes one command (simulate / estimate / compare / window) described
// by a JSON config, writing outputs plus manifest.json into output_dir.
void run_config(const nlohmann::json& config, const std::string& output_dir);

nlohmann::json load_manifest(const std::string& path);

// Option-object resolvers shared with the C interface; unknown keys are
// rejected so typos fail loudly instead of silently using a default.
nlohmann::json resolve_noise_options(const nlohmann::json& options);
nlohmann::json resolve_spike_options(const nlohmann::json& options,
                                     std::uint64_t seed);

// Runs the estimator over data: whitens by the configured noise method
// (or none), then fits the spiked model.  Noise-stage warnings are merged
// into the report.
IDReport run_estimator(const DataMatrix& data,
                       const nlohmann::json& noise_options,
                       const nlohmann::json& spike_options);

NoiseEstimate run_noise(const DataMatrix& data,
                        const nlohmann::json& noise_options);

} // namespace spikedim
