#include "plausible/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <sstream>

#include "plausible/augmentation.hpp"
#include "plausible/benchmark.hpp"
#include "plausible/config.hpp"
#include "plausible/error.hpp"
#include "plausible/ground_plane.hpp"
#include "plausible/plane_extraction.hpp"
#include "plausible/scene_io.hpp"

namespace plausible {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<double> gamma;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Pipeline config JSON");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides the config file)");
  cmd->add_option("--k", opts.k, "Search iterations");
  cmd->add_option("--gamma", opts.gamma, "Intensity-refinement exponent");
  cmd->add_flag("--print-config", opts.print_config, "Print the resolved config and exit");
}

PipelineConfig resolve_config(const CommonOptions& opts) {
  PipelineConfig cfg = opts.config_path.empty() ? PipelineConfig{} : load_config(opts.config_path);
  if (opts.seed) cfg.seed = opts.seed;
  if (opts.k) cfg.insertion.k = *opts.k;
  if (opts.gamma) cfg.lighting.gamma = *opts.gamma;
  cfg.validate();
  return cfg;
}

std::uint64_t require_seed(const PipelineConfig& cfg) {
  if (!cfg.seed) throw Error(ErrorCode::SchemaViolation, "a seed is required (--seed or config \"seed\")");
  return *cfg.seed;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void emit_json(const Json& j, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) out << j.dump(2) << '\n';
  else write_json_file(out_path, j);
}

int cmd_planes(const std::string& manifest, const std::string& out_path, const PipelineConfig& cfg,
               std::ostream& out, std::ostream& err) {
  const Scene scene = load_scene(manifest);
  const PointCloud cloud = backproject(scene.depth, scene.intrinsics, scene.cam_to_world);
  const auto planes = extract_planes(cloud, cfg.plane);

  Json j;
  Json arr = Json::array();
  for (const auto& p : planes) arr.push_back(plane_to_json(p));
  int code = 0;
  std::optional<std::size_t> ground_index;
  try {
    const Plane ground = select_ground(planes, cfg.horizontal);
    for (std::size_t i = 0; i < planes.size(); ++i)
      if (planes[i].inliers == ground.inliers) ground_index = i;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoGroundPlane) throw;
    err << "error: " << e.what() << '\n';
    code = exit_code_for(e.code());
  }
  for (std::size_t i = 0; i < arr.size(); ++i) arr[i]["ground"] = ground_index && *ground_index == i;
  j["planes"] = arr;
  j["ground_index"] = ground_index ? Json(*ground_index) : Json(nullptr);
  emit_json(j, out_path, out);
  return code;
}

int cmd_stats(const std::string& list, const std::string& categories_csv, const std::string& out_path,
              const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto manifests = read_manifest_list(list);
  std::vector<Scene> scenes;
  scenes.reserve(manifests.size());
  for (const auto& m : manifests) scenes.push_back(load_scene(m));
  const std::vector<std::string> categories = categories_csv.empty() ? cfg.categories : split_csv(categories_csv);
  const ClassStatsResult result = compute_class_stats(std::span<const Scene>(scenes), categories);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  emit_json(class_stats_to_json(result.stats), out_path, out);
  return 0;
}

int cmd_insert(const std::string& manifest, const std::string& catalog_path, const std::string& stats_path,
               const std::string& grid_path, const std::string& out_dir, const PipelineConfig& cfg,
               std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(cfg);
  const Scene scene = load_scene(manifest);
  const auto catalog = load_catalog(catalog_path);
  const ClassStats stats = class_stats_from_json(read_json_file(stats_path));
  std::optional<EnvMapGrid> grid;
  if (!grid_path.empty()) grid = read_envmap_grid(grid_path);

  fs::create_directories(out_dir);
  const std::string stem = fs::path(manifest).stem().string();
  const fs::path envmap_path = fs::path(out_dir) / (stem + ".envmap.pfm");
  const std::string source = fs::path(manifest).lexically_normal().string();
  const AugmentOutcome outcome =
      augment_scene(scene, source, catalog, stats, grid ? &*grid : nullptr, seed, cfg, envmap_path);
  if (!outcome.scene) {
    err << "skipped: " << outcome.skip_reason << '\n';
    return 2;
  }
  fs::path rgb(scene.rgb_path);
  if (rgb.is_relative()) rgb = fs::path(manifest).parent_path() / rgb;
  const Json aug = augmented_scene_to_json(*outcome.scene);
  write_json_file(fs::path(out_dir) / (stem + ".aug.json"), aug);
  write_json_file(fs::path(out_dir) / (stem + ".render.json"),
                  render_manifest_to_json(*outcome.scene, scene, rgb.lexically_normal().string()));
  out << aug.dump(2) << '\n';
  return 0;
}

int cmd_augment(const std::string& list, const std::string& catalog_path, const std::string& stats_path,
                const std::string& grid_dir, const std::string& out_dir, int jobs, const PipelineConfig& cfg,
                std::ostream& out) {
  DatasetOptions options;
  options.master_seed = require_seed(cfg);
  options.out_dir = out_dir;
  options.jobs = jobs;
  if (!grid_dir.empty()) options.grid_dir = fs::path(grid_dir);
  const auto manifests = read_manifest_list(list);
  const auto catalog = load_catalog(catalog_path);
  const ClassStats stats = class_stats_from_json(read_json_file(stats_path));
  const DatasetSummary summary = augment_dataset(manifests, catalog, stats, cfg, options);
  out << summary.to_json().dump(2) << '\n';
  return 0;
}

int cmd_bench(int count, int clutter, const std::string& out_path, const PipelineConfig& cfg, std::ostream& out) {
  BenchOptions options;
  options.count = count;
  options.clutter = clutter;
  options.seed = require_seed(cfg);
  const BenchReport report = run_search_benchmark(options, cfg.insertion);
  emit_json(report.to_json(), out_path, out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Physically plausible object insertion for RGB-D scenes", "plausible"};
  app.require_subcommand(1);

  CommonOptions planes_opts, stats_opts, insert_opts, augment_opts, bench_opts;

  std::string planes_manifest, planes_out;
  auto* planes = app.add_subcommand("planes", "Extract planes and flag the ground plane");
  planes->add_option("manifest", planes_manifest, "Scene manifest JSON")->required();
  planes->add_option("--out", planes_out, "Write the plane dump here instead of stdout");
  add_common(planes, planes_opts);

  std::string stats_list, stats_categories, stats_out;
  auto* stats = app.add_subcommand("stats", "Per-category height statistics");
  stats->add_option("list", stats_list, "Dataset list (one manifest per line)")->required();
  stats->add_option("--categories", stats_categories, "Comma-separated categories");
  stats->add_option("--out", stats_out, "Output stats JSON");
  add_common(stats, stats_opts);

  std::string ins_manifest, ins_catalog, ins_stats, ins_grid, ins_out = ".";
  auto* insert = app.add_subcommand("insert", "Insert one object into one scene");
  insert->add_option("manifest", ins_manifest, "Scene manifest JSON")->required();
  insert->add_option("--catalog", ins_catalog, "Asset catalog JSON")->required();
  insert->add_option("--stats", ins_stats, "Class stats JSON")->required();
  insert->add_option("--grid", ins_grid, "Environment-map grid (.envg)");
  insert->add_option("--out-dir", ins_out, "Output directory");
  add_common(insert, insert_opts);

  std::string aug_list, aug_catalog, aug_stats, aug_grid_dir, aug_out;
  int aug_jobs = 1;
  auto* augment = app.add_subcommand("augment", "Augment every scene of a dataset list");
  augment->add_option("list", aug_list, "Dataset list (one manifest per line)")->required();
  augment->add_option("--catalog", aug_catalog, "Asset catalog JSON")->required();
  augment->add_option("--stats", aug_stats, "Class stats JSON")->required();
  augment->add_option("--grid-dir", aug_grid_dir, "Directory of <manifest stem>.envg grids");
  augment->add_option("--out-dir", aug_out, "Output directory")->required();
  augment->add_option("--jobs", aug_jobs, "Scene-level worker count")->check(CLI::PositiveNumber);
  add_common(augment, augment_opts);

  int bench_count = 500, bench_clutter = 3;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Seeded constrained-search benchmark");
  bench->add_option("--count", bench_count, "Number of synthetic rooms")->check(CLI::NonNegativeNumber);
  bench->add_option("--clutter", bench_clutter, "Existing boxes per room")->check(CLI::NonNegativeNumber);
  bench->add_option("--out", bench_out, "Write the report here instead of stdout");
  add_common(bench, bench_opts);

  std::vector<std::string> argv_store;
  argv_store.emplace_back("plausible");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  auto run = [&](const CommonOptions& opts, auto&& body) -> int {
    try {
      const PipelineConfig cfg = resolve_config(opts);
      if (opts.print_config) {
        out << config_to_json(cfg).dump(2) << '\n';
        return 0;
      }
      return body(cfg);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      err << "error: InvariantViolation: " << e.what() << '\n';
      return 3;
    }
  };

  if (*planes)
    return run(planes_opts, [&](const PipelineConfig& cfg) { return cmd_planes(planes_manifest, planes_out, cfg, out, err); });
  if (*stats)
    return run(stats_opts, [&](const PipelineConfig& cfg) {
      return cmd_stats(stats_list, stats_categories, stats_out, cfg, out, err);
    });
  if (*insert)
    return run(insert_opts, [&](const PipelineConfig& cfg) {
      return cmd_insert(ins_manifest, ins_catalog, ins_stats, ins_grid, ins_out, cfg, out, err);
    });
  if (*augment)
    return run(augment_opts, [&](const PipelineConfig& cfg) {
      return cmd_augment(aug_list, aug_catalog, aug_stats, aug_grid_dir, aug_out, aug_jobs, cfg, out);
    });
  return run(bench_opts, [&](const PipelineConfig& cfg) {
    return cmd_bench(bench_count, bench_clutter, bench_out, cfg, out);
  });
}

}  // namespace plausible
