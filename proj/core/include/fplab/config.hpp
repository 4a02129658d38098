#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fplab/experiment.hpp"
#include "fplab/theory.hpp"

namespace fplab {

// JSON configuration documents. Keys absent from a document take the
// defaults of the named experiment family; unknown keys and values of the
// wrong type raise ConfigError naming the offending key.

/// indent < 0 gives a single line.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

/// The document must name its family under "experiment". When `expected` is
/// given, a document naming another family is rejected.
ExperimentConfig config_from_json(const std::string& text, std::optional<ExperimentKind> expected = std::nullopt);

struct DominanceConfig {
  TheoremScenario scenario;
  std::vector<double> deltas{0.5, 0.2, 0.1, 0.05};
  DominanceOptions options;
  std::string output_dir;
};

struct CrossingConfig {
  TheoremScenario scenario;
  std::vector<double> w_grid;  // empty = 0.5 * 2^-i for i = 0..grid_points-1
  std::size_t grid_points = 20;
  CrossingOptions options;
  std::string output_dir;

  std::vector<double> resolved_grid() const;
};

std::string config_to_json(const DominanceConfig& config, int indent = 2);
std::string config_to_json(const CrossingConfig& config, int indent = 2);
DominanceConfig dominance_config_from_json(const std::string& text);
CrossingConfig crossing_config_from_json(const std::string& text);

/// Reads a whole config file. Throws ConfigError naming the path when it
/// cannot be opened.
std::string read_config_text(const std::filesystem::path& path);

}  // namespace fplab
