#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "egotraj/anchors.hpp"
#include "egotraj/driftsim.hpp"
#include "egotraj/metrics.hpp"
#include "egotraj/refine.hpp"
#include "egotraj/synthdb.hpp"

namespace egotraj::cli {

struct SimulationSettings {
  std::int64_t frames = 400;
  double fps = 10.0;
  PathConfig path;
  DriftConfig drift;
  AnchorNoiseConfig anchors;
};

// Every tunable of every subcommand; the thread count is not part of it.
struct PipelineConfig {
  AnchorFilterConfig filter;
  RefineConfig refine;
  GridSamplerConfig grid;
  MetricsConfig metrics;
  SimulationSettings simulation;
  std::optional<std::uint64_t> seed;
};

// Bad config file contents or flag values; reported as a usage error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Overlays the keys present in the JSON file onto `config`. Unknown keys and
// mistyped values raise ConfigError.
void load_config_file(const std::filesystem::path& path, PipelineConfig& config);
void apply_config_json(const std::string& text, PipelineConfig& config, const std::string& source = "<config>");

// Runs every owning module's validator; failures become ConfigError.
void validate(const PipelineConfig& config);

std::string config_to_json(const PipelineConfig& config);
void write_effective_config(const PipelineConfig& config, const std::filesystem::path& dir);

}  // namespace egotraj::cli
