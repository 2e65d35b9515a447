#include "plausible/insertion_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "plausible/error.hpp"

namespace plausible {
namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double shoelace(const std::vector<Vec2>& poly) {
  double twice = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) twice += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * twice;
}

// Sutherland-Hodgman: clip `subject` against the left side of every CCW edge
// of `clip`.
double clipped_area(const Footprint2D& subject, const Footprint2D& clip) {
  const auto sc = subject.corners();
  const auto cc = clip.corners();
  std::vector<Vec2> poly(sc.begin(), sc.end());
  std::vector<Vec2> next;
  next.reserve(8);
  for (int e = 0; e < 4 && !poly.empty(); ++e) {
    const Vec2& e0 = cc[e];
    const Vec2 dir = cc[(e + 1) % 4] - e0;
    next.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& cur = poly[i];
      const Vec2& prev = poly[(i + poly.size() - 1) % poly.size()];
      const double sc_cur = cross(dir, cur - e0);
      const double sc_prev = cross(dir, prev - e0);
      if (sc_cur >= 0) {
        if (sc_prev < 0) next.push_back(prev + (cur - prev) * (sc_prev / (sc_prev - sc_cur)));
        next.push_back(cur);
      } else if (sc_prev >= 0) {
        next.push_back(prev + (cur - prev) * (sc_prev / (sc_prev - sc_cur)));
      }
    }
    std::swap(poly, next);
  }
  if (poly.size() < 3) return 0.0;
  return std::max(0.0, shoelace(poly));
}

auto key(const Footprint2D& f) {
  return std::make_tuple(f.center.x(), f.center.y(), f.half_extents.x(), f.half_extents.y(), f.yaw);
}

}  // namespace

void InsertionConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::SchemaViolation, "insertion.k must be >= 1");
  if (!(r_max >= 1)) throw Error(ErrorCode::SchemaViolation, "insertion.r_max must be >= 1");
  if (!(min_height > 0)) throw Error(ErrorCode::SchemaViolation, "insertion.min_height must be positive");
}

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> kCategories = {
      "bed", "table", "sofa", "chair", "desk", "dresser", "nightstand", "bookshelf", "toilet", "bathtub"};
  return kCategories;
}

ClassStatsResult compute_class_stats(std::span<const std::vector<Annotation>> annotation_sets,
                                     std::span<const std::string> categories) {
  std::map<std::string, std::vector<double>> heights;
  for (const auto& c : categories) heights[c];
  for (const auto& set : annotation_sets)
    for (const auto& a : set) {
      auto it = heights.find(a.category);
      if (it != heights.end()) it->second.push_back(a.box.height());
    }

  ClassStatsResult result;
  for (const auto& c : categories) {
    const auto& h = heights[c];
    if (h.size() < 2) {
      result.warnings.push_back("InsufficientData: category '" + c + "' has " + std::to_string(h.size()) +
                                " annotation(s); omitted");
      continue;
    }
    const double n = static_cast<double>(h.size());
    double sum = 0;
    for (double x : h) sum += x;
    const double mean = sum / n;
    double ss = 0;
    for (double x : h) ss += (x - mean) * (x - mean);
    result.stats[c] = {mean, std::sqrt(ss / (n - 1)), h.size()};
  }
  return result;
}

ClassStatsResult compute_class_stats(std::span<const Scene> scenes, std::span<const std::string> categories) {
  std::vector<std::vector<Annotation>> sets;
  sets.reserve(scenes.size());
  for (const auto& s : scenes) sets.push_back(s.annotations);
  return compute_class_stats(std::span<const std::vector<Annotation>>(sets), categories);
}

Json class_stats_to_json(const ClassStats& stats) {
  Json cats = Json::object();
  for (const auto& [name, h] : stats) {
    Json e;
    e["mean_height"] = h.mean;
    e["std_height"] = h.stddev;
    e["count"] = h.count;
    cats[name] = e;
  }
  Json j;
  j["categories"] = cats;
  return j;
}

ClassStats class_stats_from_json(const Json& j) {
  const Json& cats = require(j, "categories", "stats");
  if (!cats.is_object()) throw Error(ErrorCode::SchemaViolation, "stats.categories must be an object");
  ClassStats stats;
  for (auto it = cats.begin(); it != cats.end(); ++it) {
    const std::string ctx = "stats.categories." + it.key();
    HeightStats h;
    h.mean = as_number(require(*it, "mean_height", ctx), ctx + ".mean_height");
    h.stddev = as_number(require(*it, "std_height", ctx), ctx + ".std_height");
    if (it->contains("count")) h.count = it->at("count").get<std::size_t>();
    if (!(h.mean > 0) || !(h.stddev >= 0))
      throw Error(ErrorCode::SchemaViolation, ctx + " requires mean_height > 0 and std_height >= 0");
    stats[it.key()] = h;
  }
  return stats;
}

Candidate sample_candidate(Rng& rng, const FloorStats& floor, const ClassStats& stats,
                           const std::string& category, const InsertionConfig& cfg) {
  const auto it = stats.find(category);
  if (it == stats.end()) throw Error(ErrorCode::UnknownCategory, "no height statistics for '" + category + "'");
  const HeightStats& h = it->second;
  const Vec3& c = floor.center;

  Candidate cand;
  const double px = rng.uniform(c.x() - floor.sigma_x, c.x() + floor.sigma_x);
  const double py = rng.uniform(c.y() - floor.sigma_y, c.y() + floor.sigma_y);
  cand.raw_height = rng.normal(h.mean, h.stddev);
  const double s = std::max(cand.raw_height, cfg.min_height);
  cand.r = rng.uniform(1.0, cfg.r_max);
  cand.s = s / cand.r;
  cand.o = rng.uniform(-kPi, kPi);
  cand.p = Vec3(px, py, c.z());
  return cand;
}

Obb3D scaled_obb(const Asset& asset, const Vec3& p, double s, double o) {
  const double scale = s / asset.native_extents.z();
  Obb3D box;
  box.half_extents = scale * asset.native_extents / 2.0;
  box.center = Vec3(p.x(), p.y(), p.z() + s / 2.0);
  box.yaw = o;
  return box;
}

std::array<Vec2, 4> Footprint2D::corners() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec2 ax(c * half_extents.x(), s * half_extents.x());
  const Vec2 ay(-s * half_extents.y(), c * half_extents.y());
  return {center - ax - ay, center + ax - ay, center + ax + ay, center - ax + ay};
}

Footprint2D footprint(const Obb3D& box) {
  return {box.center.head<2>(), box.half_extents.head<2>(), box.yaw};
}

double overlap_area(const Footprint2D& a, const Footprint2D& b) {
  const double reach = a.half_extents.norm() + b.half_extents.norm();
  if ((a.center - b.center).squaredNorm() > reach * reach) return 0.0;
  // Fixed argument order keeps the result bitwise symmetric.
  return key(a) <= key(b) ? clipped_area(a, b) : clipped_area(b, a);
}

double collision_score(const Footprint2D& ins, std::span<const Footprint2D> existing) {
  const double area = ins.area();
  if (!(area > 0)) throw Error(ErrorCode::ZeroAreaFootprint, "inserted footprint has zero area");
  double total = 0;
  for (const auto& e : existing) total += overlap_area(ins, e);
  return total / area;
}

InsertionParams constrained_search(Rng& rng, const FloorStats& floor, std::span<const Obb3D> existing,
                                   const Asset& asset, const ClassStats& stats, const InsertionConfig& cfg,
                                   std::vector<TracedCandidate>* trace) {
  cfg.validate();
  std::vector<Footprint2D> existing_fp;
  existing_fp.reserve(existing.size());
  for (const auto& b : existing) existing_fp.push_back(footprint(b));

  InsertionParams best;
  best.l = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= cfg.k; ++i) {
    const Candidate cand = sample_candidate(rng, floor, stats, asset.category, cfg);
    const Obb3D box = scaled_obb(asset, cand.p, cand.s, cand.o);
    const double l = collision_score(footprint(box), existing_fp);
    if (trace) trace->push_back({cand, l});
    if (l < best.l) {
      best = {cand.p, cand.s, cand.o, cand.r, l, box, i, i};
      if (l == 0) return best;
    }
  }
  best.iterations = cfg.k;
  return best;
}

InsertionParams random_insert(Rng& rng, const Vec2& region_min, const Vec2& region_max, double floor_z,
                              std::span<const Obb3D> existing, const Asset& asset, const ClassStats& stats,
                              const InsertionConfig& cfg) {
  const auto it = stats.find(asset.category);
  if (it == stats.end())
    throw Error(ErrorCode::UnknownCategory, "no height statistics for '" + asset.category + "'");
  InsertionParams out;
  const double px = rng.uniform(region_min.x(), region_max.x());
  const double py = rng.uniform(region_min.y(), region_max.y());
  out.s = std::max(rng.normal(it->second.mean, it->second.stddev), cfg.min_height);
  out.o = rng.uniform(-kPi, kPi);
  out.r = 1.0;
  out.p = Vec3(px, py, floor_z);
  out.box = scaled_obb(asset, out.p, out.s, out.o);
  std::vector<Footprint2D> fps;
  for (const auto& b : existing) fps.push_back(footprint(b));
  out.l = collision_score(footprint(out.box), fps);
  out.iterations = 1;
  out.best_iteration = 1;
  return out;
}

std::vector<Asset> load_catalog(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  if (!j.is_array()) throw Error(ErrorCode::SchemaViolation, "asset catalog must be a JSON array");
  std::vector<Asset> assets;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ctx = "catalog[" + std::to_string(i) + "]";
    Asset a;
    a.id = as_string(require(j[i], "id", ctx), ctx + ".id");
    a.category = as_string(require(j[i], "category", ctx), ctx + ".category");
    a.native_extents = as_vec3(require(j[i], "native_extents", ctx), ctx + ".native_extents");
    a.mesh_ref = as_string(require(j[i], "mesh_ref", ctx), ctx + ".mesh_ref");
    if ((a.native_extents.array() <= 0).any())
      throw Error(ErrorCode::SchemaViolation, ctx + ".native_extents must be positive");
    assets.push_back(std::move(a));
  }
  return assets;
}

Json asset_to_json(const Asset& asset) {
  Json j;
  j["id"] = asset.id;
  j["category"] = asset.category;
  j["native_extents"] = to_json(asset.native_extents);
  j["mesh_ref"] = asset.mesh_ref;
  return j;
}

}  // namespace plausible
