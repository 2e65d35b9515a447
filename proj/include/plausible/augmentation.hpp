#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plausible/config.hpp"
#include "plausible/illumination.hpp"
#include "plausible/insertion_search.hpp"
#include "plausible/rng.hpp"
#include "plausible/scene_io.hpp"

namespace plausible {

/// Uniform over `categories`, optionally gated by the search-square area
/// 4 * sigma_x * sigma_y. Falls back to the full list when the gate empties it.
std::string select_category(Rng& rng, const SelectionPolicy& policy, std::span<const std::string> categories,
                            const FloorStats& floor);

/// Uniform over catalog entries of `category`. Throws NoAssetForCategory.
Asset select_asset(Rng& rng, std::span<const Asset> catalog, const std::string& category);

struct AugmentedScene {
  std::string source;
  std::uint64_t seed = 0;
  Asset asset;
  InsertionParams inserted;
  std::vector<Annotation> annotations;  // original, unmodified
  std::string lighting_mode;            // "envmap" or "camera_point_light"
  std::optional<std::string> envmap;    // relative artifact path
};

struct AugmentOutcome {
  std::optional<AugmentedScene> scene;
  std::string skip_reason;  // error code name when `scene` is empty
  double search_seconds = 0;
};

/// One insertion into one scene. Domain failures become skip records; the
/// PFM (when a grid is given) is written to `envmap_path`.
AugmentOutcome augment_scene(const Scene& scene, const std::string& source, std::span<const Asset> catalog,
                             const ClassStats& stats, const EnvMapGrid* grid, std::uint64_t seed,
                             const PipelineConfig& cfg, const std::filesystem::path& envmap_path);

Json augmented_scene_to_json(const AugmentedScene& aug);
Json render_manifest_to_json(const AugmentedScene& aug, const Scene& scene, const std::string& background_rgb);

struct DatasetOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> grid_dir;  // holds <manifest stem>.envg
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

struct SceneRecord {
  std::size_t index = 0;
  std::string source;
  std::string stem;  // output file prefix
  std::uint64_t seed = 0;
  bool success = false;
  std::string skip_reason;
  double collision_score = 0;
  int iterations = 0;
  double scene_seconds = 0;
  double search_seconds = 0;
};

struct DatasetSummary {
  std::vector<SceneRecord> records;
  std::size_t success = 0;
  std::map<std::string, std::size_t> skipped;
  Json to_json() const;
};

/// Per-scene seed = derive_seed(master, index). Writes <stem>.aug.json,
/// <stem>.render.json and (with grids) <stem>.envmap.pfm per success, plus
/// summary.json. Never aborts on a single scene.
DatasetSummary augment_dataset(std::span<const std::filesystem::path> manifests, std::span<const Asset> catalog,
                               const ClassStats& stats, const PipelineConfig& cfg, const DatasetOptions& options);

/// Reads a dataset list: one manifest path per line, '#' comments, paths
/// relative to the list file.
std::vector<std::filesystem::path> read_manifest_list(const std::filesystem::path& list_path);

/// Percentile by linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace plausible
