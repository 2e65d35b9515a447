#pragma once

#include <cstdint>
#include <vector>

#include "plausible/insertion_search.hpp"
#include "plausible/json_util.hpp"

namespace plausible {

/// Analytic search benchmark: a square room floor, `clutter` random cubes of
/// side `clutter_size`, one chair-like asset.
struct BenchOptions {
  int count = 500;
  std::uint64_t seed = 0;
  double room_size = 4.0;
  int clutter = 3;
  double clutter_size = 0.5;
};

struct BenchScenario {
  FloorStats floor;
  std::vector<Obb3D> existing;
  Asset asset;
  ClassStats stats;
};

struct BenchRun {
  double collision_score = 0;
  int iterations = 0;
  double seconds = 0;
};

struct BenchReport {
  std::vector<BenchRun> runs;
  std::size_t success = 0;  // runs with l = 0

  double success_rate() const;
  /// Timing goes under "timing"; everything else is seed-deterministic.
  Json to_json() const;
};

/// Scenario i draws from derive_seed(seed, i); the same stream then drives
/// the search.
BenchScenario make_bench_scenario(Rng& rng, const BenchOptions& options);

BenchReport run_search_benchmark(const BenchOptions& options, const InsertionConfig& cfg);

}  // namespace plausible
