#include "plausible/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "plausible/augmentation.hpp"

namespace plausible {

BenchScenario make_bench_scenario(Rng& rng, const BenchOptions& options) {
  BenchScenario sc;
  const double side = options.room_size;
  // Uniform floor over [0, side]^2: mean side/2, population std side/sqrt(12).
  sc.floor.center = Vec3(side / 2, side / 2, 0.0);
  sc.floor.sigma_x = side / std::sqrt(12.0);
  sc.floor.sigma_y = side / std::sqrt(12.0);
  sc.floor.plane.normal = Vec3::UnitZ();

  const double h = options.clutter_size / 2;
  for (int i = 0; i < options.clutter; ++i) {
    Obb3D box;
    box.center = Vec3(rng.uniform(h, side - h), rng.uniform(h, side - h), h);
    box.half_extents = Vec3(h, h, h);
    box.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    sc.existing.push_back(box);
  }
  sc.asset = {"bench_chair", "chair", Vec3(0.5, 0.5, 0.9), "bench_chair.obj"};
  sc.stats["chair"] = {0.9, 0.1, 0};
  return sc;
}

double BenchReport::success_rate() const {
  return runs.empty() ? 0.0 : static_cast<double>(success) / static_cast<double>(runs.size());
}

Json BenchReport::to_json() const {
  Json j;
  j["count"] = runs.size();
  j["success"] = success;
  j["success_rate"] = success_rate();
  double score = 0, iters = 0;
  std::vector<double> seconds;
  for (const auto& r : runs) {
    score += r.collision_score;
    iters += r.iterations;
    seconds.push_back(r.seconds);
  }
  const double n = static_cast<double>(runs.size());
  j["mean_collision_score"] = runs.empty() ? Json(nullptr) : Json(score / n);
  j["mean_iterations"] = runs.empty() ? Json(nullptr) : Json(iters / n);
  if (runs.empty()) {
    j["timing"] = nullptr;
  } else {
    j["timing"] = {{"p50_seconds", percentile(seconds, 0.5)},
                   {"p90_seconds", percentile(seconds, 0.9)},
                   {"p99_seconds", percentile(seconds, 0.99)},
                   {"max_seconds", percentile(seconds, 1.0)}};
  }
  return j;
}

BenchReport run_search_benchmark(const BenchOptions& options, const InsertionConfig& cfg) {
  BenchReport report;
  for (int i = 0; i < options.count; ++i) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
    const BenchScenario sc = make_bench_scenario(rng, options);
    const auto t0 = std::chrono::steady_clock::now();
    const InsertionParams res = constrained_search(rng, sc.floor, sc.existing, sc.asset, sc.stats, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.runs.push_back({res.l, res.iterations, secs});
    if (res.l == 0) ++report.success;
  }
  return report;
}

}  // namespace plausible
