#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plausible/ground_plane.hpp"
#include "plausible/illumination.hpp"
#include "plausible/insertion_search.hpp"
#include "plausible/json_util.hpp"
#include "plausible/plane_extraction.hpp"

namespace plausible {

struct SelectionPolicy {
  enum class Kind { UniformRandom, FloorSizeGated };
  Kind kind = Kind::UniformRandom;
  std::map<std::string, double> area_thresholds;  // category -> min floor area (m^2)

  void validate() const;
};

/// Every tunable of the pipeline. Defaults are the documented defaults.
struct PipelineConfig {
  PlaneExtractionConfig plane;
  HorizontalConfig horizontal;
  InsertionConfig insertion;
  LightingConfig lighting;
  SelectionPolicy policy;
  std::vector<std::string> categories = default_categories();
  std::optional<std::uint64_t> seed;

  void validate() const;
};

/// Overlays `j` onto defaults. Unknown keys raise SchemaViolation.
PipelineConfig config_from_json(const Json& j);
PipelineConfig load_config(const std::filesystem::path& path);
Json config_to_json(const PipelineConfig& cfg);

}  // namespace plausible
