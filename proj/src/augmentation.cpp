#include "plausible/augmentation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include "plausible/error.hpp"
#include "plausible/ground_plane.hpp"
#include "plausible/plane_extraction.hpp"

namespace plausible {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Json intrinsics_json(const CameraIntrinsics& intr) {
  return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx}, {"cy", intr.cy}, {"width", intr.width},
          {"height", intr.height}};
}

Json pose_json(const RigidTransform& pose) {
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation(r, c));
  return {{"rotation", rot}, {"translation", to_json(pose.translation)}};
}

Json annotations_json(const std::vector<Annotation>& annotations) {
  Json arr = Json::array();
  for (const auto& a : annotations) {
    Json e;
    e["category"] = a.category;
    e["center"] = to_json(a.box.center);
    e["half_extents"] = to_json(a.box.half_extents);
    e["yaw"] = a.box.yaw;
    arr.push_back(e);
  }
  return arr;
}

Json percentiles_json(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  return {{"p50", percentile(values, 0.50)}, {"p90", percentile(values, 0.90)},
          {"p99", percentile(values, 0.99)}, {"max", percentile(values, 1.0)}};
}

}  // namespace

std::string select_category(Rng& rng, const SelectionPolicy& policy, std::span<const std::string> categories,
                            const FloorStats& floor) {
  if (categories.empty()) throw Error(ErrorCode::InvariantViolation, "category list is empty");
  if (policy.kind == SelectionPolicy::Kind::FloorSizeGated) {
    const double area = 4.0 * floor.sigma_x * floor.sigma_y;
    std::vector<std::string> allowed;
    for (const auto& c : categories) {
      auto it = policy.area_thresholds.find(c);
      if (it == policy.area_thresholds.end() || it->second <= area) allowed.push_back(c);
    }
    if (!allowed.empty()) return allowed[rng.index(allowed.size())];
  }
  return categories[rng.index(categories.size())];
}

Asset select_asset(Rng& rng, std::span<const Asset> catalog, const std::string& category) {
  std::vector<const Asset*> matching;
  for (const auto& a : catalog)
    if (a.category == category) matching.push_back(&a);
  if (matching.empty()) throw Error(ErrorCode::NoAssetForCategory, "no catalog asset for '" + category + "'");
  return *matching[rng.index(matching.size())];
}

AugmentOutcome augment_scene(const Scene& scene, const std::string& source, std::span<const Asset> catalog,
                             const ClassStats& stats, const EnvMapGrid* grid, std::uint64_t seed,
                             const PipelineConfig& cfg, const std::filesystem::path& envmap_path) {
  AugmentOutcome outcome;
  try {
    const PointCloud cloud = backproject(scene.depth, scene.intrinsics, scene.cam_to_world);
    const auto planes = extract_planes(cloud, cfg.plane);
    const Plane ground = select_ground(planes, cfg.horizontal);
    const FloorStats floor = floor_stats(ground, cloud);

    std::vector<std::string> categories;
    for (const auto& c : cfg.categories)
      if (stats.contains(c)) categories.push_back(c);
    if (categories.empty())
      throw Error(ErrorCode::UnknownCategory, "no configured category has height statistics");

    Rng rng(seed);
    std::optional<Asset> asset;
    for (std::size_t attempt = 0; attempt < categories.size() && !asset; ++attempt) {
      const std::string category = select_category(rng, cfg.policy, categories, floor);
      try {
        asset = select_asset(rng, catalog, category);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoAssetForCategory) throw;
      }
    }
    if (!asset) throw Error(ErrorCode::NoAssetForCategory, "no asset found after re-drawing categories");

    std::vector<Obb3D> existing;
    existing.reserve(scene.annotations.size());
    for (const auto& a : scene.annotations) existing.push_back(a.box);

    const auto t0 = Clock::now();
    const InsertionParams params = constrained_search(rng, floor, existing, *asset, stats, cfg.insertion);
    outcome.search_seconds = seconds_since(t0);

    AugmentedScene aug;
    aug.source = source;
    aug.seed = seed;
    aug.asset = *asset;
    aug.inserted = params;
    aug.annotations = scene.annotations;
    if (grid) {
      build_insertion_envmap(*grid, params.p, scene.intrinsics, scene.cam_to_world, floor.plane.normal, cfg.lighting,
                             envmap_path);
      aug.lighting_mode = "envmap";
      aug.envmap = envmap_path.filename().string();
    } else {
      aug.lighting_mode = "camera_point_light";
    }
    outcome.scene = std::move(aug);
  } catch (const Error& e) {
    if (exit_code_for(e.code()) == 3) throw;
    outcome.skip_reason = std::string(to_string(e.code()));
  }
  return outcome;
}

Json augmented_scene_to_json(const AugmentedScene& aug) {
  const InsertionParams& ins = aug.inserted;
  Json inserted;
  inserted["asset_id"] = aug.asset.id;
  inserted["category"] = aug.asset.category;
  inserted["p"] = to_json(ins.p);
  inserted["s"] = ins.s;
  inserted["yaw"] = ins.o;
  inserted["resize"] = ins.r;
  inserted["collision_score"] = ins.l;
  inserted["iterations"] = ins.iterations;
  inserted["box"] = to_json(ins.box);

  Json lighting;
  lighting["mode"] = aug.lighting_mode;
  if (aug.envmap) lighting["envmap"] = *aug.envmap;

  Json j;
  j["source"] = aug.source;
  j["seed"] = aug.seed;
  j["inserted"] = inserted;
  j["annotations"] = annotations_json(aug.annotations);
  j["lighting"] = lighting;
  return j;
}

Json render_manifest_to_json(const AugmentedScene& aug, const Scene& scene, const std::string& background_rgb) {
  Json j;
  j["mesh_ref"] = aug.asset.mesh_ref;
  // Mesh origin is taken to be its bottom-face center.
  j["translation"] = to_json(aug.inserted.p);
  j["uniform_scale"] = aug.inserted.s / aug.asset.native_extents.z();
  j["yaw"] = aug.inserted.o;
  if (aug.envmap) j["envmap"] = *aug.envmap;
  j["background_rgb"] = background_rgb;
  j["camera"] = {{"intrinsics", intrinsics_json(scene.intrinsics)}, {"cam_to_world", pose_json(scene.cam_to_world)}};
  return j;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

std::vector<std::filesystem::path> read_manifest_list(const std::filesystem::path& list_path) {
  std::ifstream in(list_path);
  if (!in) {
    if (!std::filesystem::exists(list_path)) throw Error(ErrorCode::MissingFile, list_path.string());
    throw Error(ErrorCode::IoError, "cannot read " + list_path.string());
  }
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::filesystem::path p(line.substr(b, e - b + 1));
    out.push_back(p.is_absolute() ? p : list_path.parent_path() / p);
  }
  return out;
}

Json DatasetSummary::to_json() const {
  Json j;
  j["scenes"] = records.size();
  j["success"] = success;
  Json skipped_json = Json::object();
  for (const auto& [reason, n] : skipped) skipped_json[reason] = n;
  j["skipped"] = skipped_json;

  double score_sum = 0, iter_sum = 0;
  std::vector<double> scene_times, search_times;
  Json skipped_scenes = Json::array();
  for (const auto& r : records) {
    scene_times.push_back(r.scene_seconds);
    if (r.success) {
      score_sum += r.collision_score;
      iter_sum += r.iterations;
      search_times.push_back(r.search_seconds);
    } else {
      skipped_scenes.push_back({{"index", r.index}, {"source", r.source}, {"reason", r.skip_reason}});
    }
  }
  j["mean_collision_score"] = success ? Json(score_sum / static_cast<double>(success)) : Json(nullptr);
  j["mean_iterations"] = success ? Json(iter_sum / static_cast<double>(success)) : Json(nullptr);
  j["skipped_scenes"] = skipped_scenes;
  j["timing"] = {{"scene_seconds", percentiles_json(scene_times)}, {"search_seconds", percentiles_json(search_times)}};
  return j;
}

DatasetSummary augment_dataset(std::span<const std::filesystem::path> manifests, std::span<const Asset> catalog,
                               const ClassStats& stats, const PipelineConfig& cfg, const DatasetOptions& options) {
  cfg.validate();
  std::filesystem::create_directories(options.out_dir);
  std::vector<SceneRecord> records(manifests.size());

  auto process = [&](std::size_t i) {
    SceneRecord& rec = records[i];
    const auto t0 = Clock::now();
    rec.index = i;
    rec.source = manifests[i].lexically_normal().string();
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%05zu_", i);
    rec.stem = prefix + manifests[i].stem().string();
    rec.seed = derive_seed(options.master_seed, i);
    try {
      const Scene scene = load_scene(manifests[i]);
      std::optional<EnvMapGrid> grid;
      if (options.grid_dir) grid = read_envmap_grid(*options.grid_dir / (manifests[i].stem().string() + ".envg"));
      const auto envmap_path = options.out_dir / (rec.stem + ".envmap.pfm");
      const AugmentOutcome outcome = augment_scene(scene, rec.source, catalog, stats, grid ? &*grid : nullptr,
                                                   rec.seed, cfg, envmap_path);
      if (outcome.scene) {
        rec.success = true;
        rec.collision_score = outcome.scene->inserted.l;
        rec.iterations = outcome.scene->inserted.iterations;
        rec.search_seconds = outcome.search_seconds;
        write_json_file(options.out_dir / (rec.stem + ".aug.json"), augmented_scene_to_json(*outcome.scene));
        std::filesystem::path rgb(scene.rgb_path);
        if (rgb.is_relative()) rgb = manifests[i].parent_path() / rgb;
        write_json_file(options.out_dir / (rec.stem + ".render.json"),
                        render_manifest_to_json(*outcome.scene, scene, rgb.lexically_normal().string()));
      } else {
        rec.skip_reason = outcome.skip_reason;
      }
    } catch (const Error& e) {
      rec.skip_reason = std::string(to_string(e.code()));
    } catch (const std::exception& e) {
      rec.skip_reason = "InvariantViolation";
    }
    rec.scene_seconds = seconds_since(t0);
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < manifests.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < manifests.size(); i = next++) process(i);
      });
    for (auto& t : workers) t.join();
  }

  DatasetSummary summary;
  summary.records = std::move(records);
  for (const auto& r : summary.records) {
    if (r.success) ++summary.success;
    else ++summary.skipped[r.skip_reason];
  }
  write_json_file(options.out_dir / "summary.json", summary.to_json());
  return summary;
}

}  // namespace plausible
