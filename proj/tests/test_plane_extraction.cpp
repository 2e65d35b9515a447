#include <doctest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "room_oracle.hpp"
#include "plausible/error.hpp"
#include "plausible/plane_extraction.hpp"
#include "plausible/rng.hpp"
#include "plausible/synth_fixtures.hpp"

using namespace plausible;

namespace {

// Organized cloud from a per-pixel world point; camera depth is the point's z.
PointCloud make_cloud(int w, int h, const std::function<bool(int, int, Vec3&)>& point_at) {
  PointCloud c;
  c.width = w;
  c.height = h;
  c.points.assign(static_cast<std::size_t>(w) * h, Vec3::Zero());
  c.depth.assign(c.points.size(), 0.0);
  c.valid.assign(c.points.size(), 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      Vec3 p;
      if (!point_at(u, v, p)) continue;
      const auto i = c.index(u, v);
      c.points[i] = p;
      c.depth[i] = p.z();
      c.valid[i] = 1;
    }
  return c;
}

// Fronto-parallel plane z = depth seen by a unit-focal pinhole at 100 px.
PointCloud flat_cloud(int w, int h, double depth) {
  return make_cloud(w, h, [&](int u, int v, Vec3& p) {
    p = Vec3((u - w / 2.0) / 100.0 * depth, (v - h / 2.0) / 100.0 * depth, depth);
    return true;
  });
}

std::vector<int> all_pixels_where(const PointCloud& c, const std::function<bool(int, int)>& keep) {
  std::vector<int> out;
  for (int v = 0; v < c.height; ++v)
    for (int u = 0; u < c.width; ++u)
      if (c.valid[c.index(u, v)] && keep(u, v)) out.push_back(static_cast<int>(c.index(u, v)));
  return out;
}

}  // namespace

TEST_CASE("fit_plane: exact fits") {
  const std::vector<Vec3> tri = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const PlaneFit f = fit_plane(tri);
  CHECK(f.normal.isApprox(Vec3::UnitZ()));
  CHECK(std::abs(f.offset) < 1e-15);
  CHECK(f.mse < 1e-30);

  Rng rng(3);
  std::vector<Vec3> flat;
  for (int i = 0; i < 1000; ++i) flat.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), 0.5);
  const PlaneFit g = fit_plane(flat);
  CHECK(g.normal.isApprox(Vec3::UnitZ(), 1e-12));
  CHECK(g.offset == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g.mse < 1e-12);
}

TEST_CASE("fit_plane: sign convention") {
  auto normal_of = [](const Vec3& n, double d) {
    // Three non-collinear points on n . x + d = 0, built in an arbitrary order.
    Vec3 a = n.unitOrthogonal(), b = n.cross(a);
    const Vec3 o = -d * n;
    return fit_plane(std::vector<Vec3>{o, o + 2 * a, o - b + a}).normal;
  };
  CHECK(normal_of(Vec3(0, 0, -1), 1).isApprox(Vec3(0, 0, 1)));
  CHECK(normal_of(Vec3(-1, 0, 0), 2).isApprox(Vec3(1, 0, 0)));
  CHECK(normal_of(Vec3(0, -1, 0), 2).isApprox(Vec3(0, 1, 0)));
  CHECK(normal_of(Vec3(-1, -1, 0).normalized(), 0.3).isApprox(Vec3(1, 1, 0).normalized()));
}

TEST_CASE("fit_plane: noisy plane agrees with an SVD oracle") {
  Rng rng(11);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10000; ++i) pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.normal(0.0, 0.01));
  const PlaneFit f = fit_plane(pts);

  // Oracle: right singular vector of the centered data matrix.
  Eigen::MatrixXd m(pts.size(), 3);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (pts[i] - mean).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  const Vec3 n_oracle = svd.matrixV().col(2);
  const double s = svd.singularValues()(2);
  const double mse_oracle = s * s / static_cast<double>(pts.size());

  CHECK(oracle::angle_deg(f.normal, Vec3::UnitZ()) < 1.0);
  CHECK(oracle::angle_deg(f.normal, n_oracle) < 1e-6);
  CHECK(f.mse == doctest::Approx(mse_oracle).epsilon(1e-9));
  CHECK(std::abs(f.mse - 1e-4) < 0.2e-4);
}

TEST_CASE("fit_plane: degenerate input") {
  CHECK_THROWS_AS(fit_plane(std::vector<Vec3>{{0, 0, 0}, {1, 1, 1}}), Error);
  try {
    fit_plane(std::vector<Vec3>{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

TEST_CASE("build_block_graph: tiling and rejection") {
  PlaneExtractionConfig cfg;
  SUBCASE("40x40 flat cloud is a full 4x4 lattice") {
    const BlockGraph g = build_block_graph(flat_cloud(40, 40, 2.0), cfg);
    CHECK(g.blocks_x == 4);
    CHECK(g.blocks_y == 4);
    CHECK(g.nodes.size() == 16);
    CHECK(g.edges.size() == 24);
    for (auto [a, b] : g.edges) {
      const auto& na = g.nodes[a];
      const auto& nb = g.nodes[b];
      CHECK(std::abs(na.block_x - nb.block_x) + std::abs(na.block_y - nb.block_y) == 1);
      CHECK(a < b);
    }
  }
  SUBCASE("a block straddling a 1 m depth step is dropped") {
    const PointCloud c = make_cloud(20, 10, [](int u, int v, Vec3& p) {
      const double z = u < 5 ? 1.0 : 2.0;
      p = Vec3(u * 0.01, v * 0.01, z);
      return true;
    });
    const BlockGraph g = build_block_graph(c, cfg);
    CHECK(g.nodes.size() == 1);
    CHECK(g.lattice[0] == -1);
    CHECK(g.lattice[1] == 0);
  }
  SUBCASE("all-invalid depth gives an empty graph") {
    const PointCloud c = make_cloud(40, 40, [](int, int, Vec3&) { return false; });
    const BlockGraph g = build_block_graph(c, cfg);
    CHECK(g.nodes.empty());
    CHECK(g.edges.empty());
    CHECK(ahc_merge(g, c, cfg).empty());
  }
}

TEST_CASE("ahc_merge: a single noiseless plane becomes one plane") {
  PlaneExtractionConfig cfg;
  const PointCloud c = flat_cloud(40, 40, 2.0);
  const BlockGraph g = build_block_graph(c, cfg);
  const auto planes = ahc_merge(g, c, cfg);
  REQUIRE(planes.size() == 1);
  CHECK(planes[0].inliers.size() == 1600);
  CHECK(planes[0].normal.isApprox(Vec3::UnitZ()));
}

TEST_CASE("ahc_merge: a room corner gives three planes") {
  RoomSpec spec;
  spec.width = 1.0;
  spec.depth = 1.0;
  spec.wall_heights = {1.0, 0.0, 1.0, 0.0};
  spec.camera = look_at(Vec3(1.6, 1.6, 1.3), Vec3(0.35, 0.35, 0.3));
  spec.noise_sigma = 0.002;
  const RenderedRoom room = cast_room(spec, 5);
  const PointCloud cloud = backproject(room.depth, spec.intrinsics, spec.camera);
  for (const auto& gt : room.planes) REQUIRE(gt.visible_pixels > 5000);

  PlaneExtractionConfig cfg;
  const auto planes = ahc_merge(build_block_graph(cloud, cfg), cloud, cfg);
  REQUIRE(planes.size() == 3);
  std::set<std::string> seen;
  for (const auto& p : planes) {
    for (const auto& gt : room.planes)
      if (oracle::angle_deg(p.normal, gt.normal) < 2.0) seen.insert(gt.label);
  }
  CHECK(seen == std::set<std::string>{"floor", "wall_x0", "wall_y0"});
}

TEST_CASE("ahc_merge: random points in a cube yield nothing") {
  Rng rng(17);
  const PointCloud c = make_cloud(60, 60, [&](int, int, Vec3& p) {
    p = Vec3(rng.uniform01(), rng.uniform01(), 1.0 + rng.uniform01());
    return true;
  });
  PlaneExtractionConfig cfg;
  const BlockGraph g = build_block_graph(c, cfg);
  const auto planes = ahc_merge(g, c, cfg);
  CHECK(planes.empty());
  // Oracle: no block survives, so no cluster can reach min_inliers.
  std::size_t block_points = 0;
  for (const auto& n : g.nodes) block_points += n.pixels.size();
  CHECK(block_points < static_cast<std::size_t>(cfg.min_inliers));
  CHECK(extract_planes(c, cfg).empty());
}

TEST_CASE("region_grow: border absorption and distance gate") {
  PlaneExtractionConfig cfg;
  const int n = 30;
  const auto interior = [&](int u, int v) { return u > 0 && v > 0 && u < n - 1 && v < n - 1; };

  SUBCASE("an exact-inlier border is absorbed") {
    const PointCloud c = flat_cloud(n, n, 1.0);
    const Plane seed = make_plane(c, all_pixels_where(c, interior));
    REQUIRE(seed.inliers.size() == 28 * 28);
    const auto grown = region_grow({seed}, c, cfg);
    REQUIRE(grown.size() == 1);
    CHECK(grown[0].inliers.size() == seed.inliers.size() + (n * n - 28 * 28));
  }
  SUBCASE("a pixel 10 cm off the plane stays out") {
    const PointCloud c = make_cloud(n, n, [&](int u, int v, Vec3& p) {
      const double z = (u == 0 && v == 5) ? 1.1 : 1.0;
      p = Vec3((u - n / 2.0) / 100.0, (v - n / 2.0) / 100.0, z);
      return true;
    });
    const Plane seed = make_plane(c, all_pixels_where(c, interior));
    const auto grown = region_grow({seed}, c, cfg);
    REQUIRE(grown.size() == 1);
    CHECK(grown[0].inliers.size() == static_cast<std::size_t>(n * n - 1));
    CHECK_FALSE(std::binary_search(grown[0].inliers.begin(), grown[0].inliers.end(),
                                   static_cast<int>(c.index(0, 5))));
  }
}

TEST_CASE("region_grow: equidistant pixels join the lower-index plane") {
  PlaneExtractionConfig cfg;
  // Columns 0-9 at z = 1.00, column 10 at z = 1.01, columns 11-20 at z = 1.02.
  const PointCloud c = make_cloud(21, 10, [](int u, int v, Vec3& p) {
    const double z = u < 10 ? 1.0 : (u == 10 ? 1.01 : 1.02);
    p = Vec3(u * 0.01, v * 0.01, z);
    return true;
  });
  const Plane low = make_plane(c, all_pixels_where(c, [](int u, int) { return u < 10; }));
  const Plane high = make_plane(c, all_pixels_where(c, [](int u, int) { return u > 10; }));
  const double dl = std::abs(low.distance(c.points[c.index(10, 0)]));
  const double dh = std::abs(high.distance(c.points[c.index(10, 0)]));
  REQUIRE(std::abs(dl - dh) <= 1e-12);

  for (int order = 0; order < 2; ++order) {
    const std::vector<Plane> input = order == 0 ? std::vector<Plane>{low, high} : std::vector<Plane>{high, low};
    const auto grown = region_grow(input, c, cfg);
    REQUIRE(grown.size() == 2);
    const double winner_z = order == 0 ? 1.0 : 1.02;
    for (const auto& p : grown) {
      const bool has_middle = std::binary_search(p.inliers.begin(), p.inliers.end(), static_cast<int>(c.index(10, 3)));
      CHECK(has_middle == (std::abs(p.centroid.z() - winner_z) < 0.006));
    }
  }
}

TEST_CASE("merge_adjacent joins touching pieces of one surface only") {
  PlaneExtractionConfig cfg;
  const PointCloud c = flat_cloud(40, 40, 2.0);
  const Plane left = make_plane(c, all_pixels_where(c, [](int u, int) { return u < 20; }));
  const Plane right = make_plane(c, all_pixels_where(c, [](int u, int) { return u >= 20; }));
  const auto merged = merge_adjacent({left, right}, c, cfg);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].inliers.size() == 1600);

  // A floor and a wall meeting at a crease stay apart.
  const PointCloud corner = make_cloud(40, 40, [](int u, int v, Vec3& p) {
    p = u < 20 ? Vec3(u * 0.05, v * 0.05, 2.0) : Vec3(0.95, v * 0.05, 2.0 + (u - 19) * 0.05);
    return true;
  });
  const Plane a = make_plane(corner, all_pixels_where(corner, [](int u, int) { return u < 20; }));
  const Plane b = make_plane(corner, all_pixels_where(corner, [](int u, int) { return u >= 20; }));
  CHECK(merge_adjacent({a, b}, corner, cfg).size() == 2);
}

TEST_CASE("extract_planes: invariants on random rooms") {
  PlaneExtractionConfig cfg;
  for (int i = 0; i < 6; ++i) {
    Rng rng(derive_seed(404, static_cast<std::uint64_t>(i)));
    RandomRoomOptions opts;
    opts.noise_sigma = (i % 2) ? 0.005 : 0.0;
    const RoomSpec spec = random_room(rng, opts);
    const RenderedRoom room = cast_room(spec, static_cast<std::uint64_t>(i));
    const PointCloud cloud = backproject(room.depth, spec.intrinsics, spec.camera);
    const auto planes = extract_planes(cloud, cfg);
    REQUIRE_FALSE(planes.empty());

    std::set<int> used;
    for (std::size_t k = 0; k < planes.size(); ++k) {
      const Plane& p = planes[k];
      CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
      CHECK(p.mse >= 0);
      CHECK(p.mse <= cfg.mse_threshold);
      CHECK(p.inliers.size() >= static_cast<std::size_t>(cfg.block_size));
      const bool sign_ok = p.normal.z() > 1e-12 ||
                           (std::abs(p.normal.z()) <= 1e-12 && (p.normal.x() > 1e-12 ||
                                                                (std::abs(p.normal.x()) <= 1e-12 && p.normal.y() >= 0)));
      CHECK(sign_ok);
      double sq = 0;
      for (int idx : p.inliers) {
        CHECK(used.insert(idx).second);
        sq += p.distance(cloud.points[idx]) * p.distance(cloud.points[idx]);
      }
      CHECK(sq / static_cast<double>(p.inliers.size()) == doctest::Approx(p.mse).epsilon(1e-9));
      if (k > 0) CHECK(planes[k - 1].inliers.size() >= p.inliers.size());
    }

    const auto again = extract_planes(cloud, cfg);
    REQUIRE(again.size() == planes.size());
    for (std::size_t k = 0; k < planes.size(); ++k) {
      CHECK(again[k].inliers == planes[k].inliers);
      CHECK(again[k].normal == planes[k].normal);
      CHECK(again[k].offset == planes[k].offset);
    }
  }
}

TEST_CASE("extract_planes: recovery on unambiguous noiseless rooms") {
  PlaneExtractionConfig cfg;
  int checked = 0;
  for (std::uint64_t i = 0; checked < 5 && i < 100; ++i) {
    Rng rng(derive_seed(77, i));
    const RoomSpec spec = random_room(rng, RandomRoomOptions{});
    const RenderedRoom room = cast_room(spec, i);
    const oracle::PlaneCensus census = oracle::plane_census(room, cfg);
    if (census.ambiguous) continue;
    ++checked;
    const auto planes = extract_planes(backproject(room.depth, spec.intrinsics, spec.camera), cfg);
    CHECK(static_cast<int>(planes.size()) == census.expected);
    for (const auto& p : planes) {
      double best = 180;
      for (const auto& gt : room.planes) best = std::min(best, oracle::angle_deg(p.normal, gt.normal));
      CHECK(best <= 2.0);
    }
  }
  CHECK(checked == 5);
}

TEST_CASE("plane_to_json lists the dump fields") {
  const PointCloud c = flat_cloud(20, 20, 1.0);
  std::vector<int> all(400);
  for (int i = 0; i < 400; ++i) all[i] = i;
  const Json j = plane_to_json(make_plane(c, all));
  for (const char* key : {"normal", "offset", "mse", "inlier_count", "centroid", "axis_std"}) CHECK(j.contains(key));
  CHECK(j["inlier_count"] == 400);
}
