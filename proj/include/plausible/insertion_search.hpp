#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "plausible/geometry.hpp"
#include "plausible/ground_plane.hpp"
#include "plausible/json_util.hpp"
#include "plausible/rng.hpp"
#include "plausible/scene_io.hpp"

namespace plausible {

struct HeightStats {
  double mean = 0;    // m_h
  double stddev = 0;  // sigma_h (sample, n-1)
  std::size_t count = 0;
};

/// Category -> height statistics. std::map keeps serialization ordered.
using ClassStats = std::map<std::string, HeightStats>;

struct InsertionConfig {
  int k = 1000;
  double r_max = 2.0;
  double min_height = 0.1;

  void validate() const;
};

struct Asset {
  std::string id;
  std::string category;
  Vec3 native_extents = Vec3::Ones();
  std::string mesh_ref;
};

/// One draw of search parameters before scoring.
struct Candidate {
  Vec3 p = Vec3::Zero();  // bottom-surface center
  double s = 0;           // height after resize
  double o = 0;           // yaw
  double r = 1;           // resize factor
  double raw_height = 0;  // N(m_h, sigma_h) draw before clamp and resize
};

struct InsertionParams {
  Vec3 p = Vec3::Zero();
  double s = 0;
  double o = 0;
  double r = 1;
  double l = 0;  // collision score
  Obb3D box;
  int iterations = 0;  // candidates examined, including the returned one
  int best_iteration = 0;  // 1-based index of the returned candidate
};

/// Top-view oriented rectangle.
struct Footprint2D {
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Ones();
  double yaw = 0;

  double area() const { return 4.0 * half_extents.x() * half_extents.y(); }
  /// Counter-clockwise corners.
  std::array<Vec2, 4> corners() const;
};

struct ClassStatsResult {
  ClassStats stats;
  std::vector<std::string> warnings;  // InsufficientData, one per omitted category
};

/// Mean and sample std of annotation heights per category; categories with
/// fewer than two annotations are omitted with a warning.
ClassStatsResult compute_class_stats(std::span<const Scene> scenes, std::span<const std::string> categories);
ClassStatsResult compute_class_stats(std::span<const std::vector<Annotation>> annotation_sets,
                                     std::span<const std::string> categories);

Json class_stats_to_json(const ClassStats& stats);
ClassStats class_stats_from_json(const Json& j);

/// Draw order: p_x, p_y, s, r, o. Throws UnknownCategory.
Candidate sample_candidate(Rng& rng, const FloorStats& floor, const ClassStats& stats,
                           const std::string& category, const InsertionConfig& cfg);

Obb3D scaled_obb(const Asset& asset, const Vec3& p, double s, double o);

Footprint2D footprint(const Obb3D& box);

/// Exact intersection area of two oriented rectangles.
double overlap_area(const Footprint2D& a, const Footprint2D& b);

/// Sum of overlaps normalized by the inserted footprint area. Throws
/// ZeroAreaFootprint.
double collision_score(const Footprint2D& ins, std::span<const Footprint2D> existing);

/// Rejection search over sampled placements. `trace`, when given, receives every examined candidate with
/// its score, in order.
struct TracedCandidate {
  Candidate candidate;
  double l = 0;
};
InsertionParams constrained_search(Rng& rng, const FloorStats& floor, std::span<const Obb3D> existing,
                                   const Asset& asset, const ClassStats& stats, const InsertionConfig& cfg,
                                   std::vector<TracedCandidate>* trace = nullptr);

/// Unconstrained baseline: position uniform over `region_min`..`region_max`
/// (XY), height from the class law without resize, uniform yaw, and no
/// collision scoring. The returned l is computed after the fact.
InsertionParams random_insert(Rng& rng, const Vec2& region_min, const Vec2& region_max, double floor_z,
                              std::span<const Obb3D> existing, const Asset& asset, const ClassStats& stats,
                              const InsertionConfig& cfg);

std::vector<Asset> load_catalog(const std::filesystem::path& path);
Json asset_to_json(const Asset& asset);

/// Default category vocabulary.
const std::vector<std::string>& default_categories();

}  // namespace plausible
