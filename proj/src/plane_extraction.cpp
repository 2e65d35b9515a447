#include "plausible/plane_extraction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "plausible/error.hpp"

namespace plausible {
namespace {

constexpr double kSignEps = 1e-12;

// normal_z >= 0; for horizontal normals fall back to x, then y.
Vec3 canonical_normal(Vec3 n) {
  n.normalize();
  bool flip;
  if (std::abs(n.z()) > kSignEps) flip = n.z() < 0;
  else if (std::abs(n.x()) > kSignEps) flip = n.x() < 0;
  else flip = n.y() < 0;
  return flip ? Vec3(-n) : n;
}

PlaneFit fit_from_covariance(const Vec3& centroid, const Mat3& cov) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  const Vec3 evals = solver.eigenvalues();  // ascending
  if (!(evals(2) > 0) || evals(1) <= 1e-10 * evals(2))
    throw Error(ErrorCode::DegenerateInput, "points are collinear or coincident");
  PlaneFit fit;
  fit.normal = canonical_normal(solver.eigenvectors().col(0));
  fit.offset = -fit.normal.dot(centroid);
  fit.mse = std::max(0.0, evals(0));
  return fit;
}

}  // namespace

void PlaneExtractionConfig::validate() const {
  if (block_size <= 0 || !(mse_threshold > 0) || !(grow_distance > 0) || min_inliers <= 0 ||
      !(depth_discontinuity > 0) || !(min_block_fill > 0 && min_block_fill <= 1))
    throw Error(ErrorCode::SchemaViolation, "plane_extraction parameters must be positive");
}

Vec3 PointMoments::normal() const {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(covariance());
  return solver.eigenvectors().col(0);
}

double PointMoments::mean_sq_distance(const Vec3& n, double d) const {
  const Vec3 m = mean();
  return std::max(0.0, n.dot(outer * n) / count + 2.0 * d * n.dot(m) + d * d);
}

double PointMoments::plane_mse() const {
  if (count < 3) return 0;
  Eigen::SelfAdjointEigenSolver<Mat3> solver(covariance(), Eigen::EigenvaluesOnly);
  return std::max(0.0, solver.eigenvalues()(0));
}

PlaneFit fit_plane(std::span<const Vec3> points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateInput, "need at least 3 points");
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  PlaneFit fit = fit_from_covariance(centroid, cov);
  // Report mse as the literal mean squared orthogonal distance.
  double sq = 0;
  for (const auto& p : points) {
    const double dist = fit.normal.dot(p) + fit.offset;
    sq += dist * dist;
  }
  fit.mse = sq / static_cast<double>(points.size());
  return fit;
}

Plane make_plane(const PointCloud& cloud, std::vector<int> inliers) {
  std::sort(inliers.begin(), inliers.end());
  std::vector<Vec3> pts;
  pts.reserve(inliers.size());
  for (int i : inliers) pts.push_back(cloud.points[i]);
  const PlaneFit fit = fit_plane(pts);

  Plane plane;
  plane.normal = fit.normal;
  plane.offset = fit.offset;
  plane.mse = fit.mse;
  plane.inliers = std::move(inliers);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Vec3 var = Vec3::Zero();
  for (const auto& p : pts) var += (p - mean).cwiseAbs2();
  plane.centroid = mean;
  plane.axis_std = (var / static_cast<double>(pts.size())).cwiseSqrt();
  return plane;
}

void sort_planes(std::vector<Plane>& planes) {
  std::stable_sort(planes.begin(), planes.end(), [](const Plane& a, const Plane& b) {
    if (a.inliers.size() != b.inliers.size()) return a.inliers.size() > b.inliers.size();
    return std::tie(a.normal.x(), a.normal.y(), a.normal.z()) <
           std::tie(b.normal.x(), b.normal.y(), b.normal.z());
  });
}

BlockGraph build_block_graph(const PointCloud& cloud, const PlaneExtractionConfig& cfg) {
  cfg.validate();
  const int bs = cfg.block_size;
  BlockGraph g;
  g.blocks_x = cloud.width / bs;
  g.blocks_y = cloud.height / bs;
  g.lattice.assign(static_cast<std::size_t>(g.blocks_x) * g.blocks_y, -1);
  const auto min_valid = static_cast<std::size_t>(std::ceil(cfg.min_block_fill * bs * bs));

  for (int by = 0; by < g.blocks_y; ++by) {
    for (int bx = 0; bx < g.blocks_x; ++bx) {
      BlockNode node;
      node.block_x = bx;
      node.block_y = by;
      bool discontinuous = false;
      for (int v = by * bs; v < (by + 1) * bs && !discontinuous; ++v) {
        for (int u = bx * bs; u < (bx + 1) * bs; ++u) {
          const std::size_t i = cloud.index(u, v);
          if (!cloud.valid[i]) continue;
          // Depth step against the right and lower neighbors inside the block.
          if (u + 1 < (bx + 1) * bs) {
            const std::size_t r = cloud.index(u + 1, v);
            if (cloud.valid[r] && std::abs(cloud.depth[r] - cloud.depth[i]) > cfg.depth_discontinuity) {
              discontinuous = true;
              break;
            }
          }
          if (v + 1 < (by + 1) * bs) {
            const std::size_t d = cloud.index(u, v + 1);
            if (cloud.valid[d] && std::abs(cloud.depth[d] - cloud.depth[i]) > cfg.depth_discontinuity) {
              discontinuous = true;
              break;
            }
          }
          node.pixels.push_back(static_cast<int>(i));
          node.moments.add(cloud.points[i]);
        }
      }
      if (discontinuous || node.pixels.size() < std::max<std::size_t>(min_valid, 3)) continue;
      std::vector<Vec3> pts;
      pts.reserve(node.pixels.size());
      for (int i : node.pixels) pts.push_back(cloud.points[i]);
      try {
        node.fit = fit_plane(pts);
      } catch (const Error&) {
        continue;
      }
      if (node.fit.mse > cfg.mse_threshold) continue;
      g.lattice[static_cast<std::size_t>(by) * g.blocks_x + bx] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(std::move(node));
    }
  }

  for (int by = 0; by < g.blocks_y; ++by) {
    for (int bx = 0; bx < g.blocks_x; ++bx) {
      const int a = g.lattice[static_cast<std::size_t>(by) * g.blocks_x + bx];
      if (a < 0) continue;
      if (bx + 1 < g.blocks_x) {
        const int b = g.lattice[static_cast<std::size_t>(by) * g.blocks_x + bx + 1];
        if (b >= 0) g.edges.emplace_back(a, b);
      }
      if (by + 1 < g.blocks_y) {
        const int b = g.lattice[static_cast<std::size_t>(by + 1) * g.blocks_x + bx];
        if (b >= 0) g.edges.emplace_back(a, b);
      }
    }
  }
  return g;
}

std::vector<Plane> ahc_merge(const BlockGraph& graph, const PointCloud& cloud,
                             const PlaneExtractionConfig& cfg) {
  struct Cluster {
    PointMoments moments;
    std::vector<int> blocks;
    std::vector<int> neighbors;  // sorted cluster ids
    int version = 0;
    bool alive = true;
  };
  struct Candidate {
    double mse;
    int a, b, version_a, version_b;
  };
  struct Worse {
    bool operator()(const Candidate& x, const Candidate& y) const {
      return std::tie(x.mse, x.a, x.b) > std::tie(y.mse, y.a, y.b);
    }
  };

  std::vector<Cluster> clusters(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    clusters[i].moments = graph.nodes[i].moments;
    clusters[i].blocks = {static_cast<int>(i)};
  }
  std::priority_queue<Candidate, std::vector<Candidate>, Worse> queue;
  auto push = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    PointMoments merged = clusters[a].moments;
    merged += clusters[b].moments;
    const double mse = merged.plane_mse();
    if (mse > cfg.mse_threshold) return;
    // Both sides must also fit the merged plane on their own; otherwise a
    // large cluster can absorb a small foreign one while the pooled mse stays low.
    const Vec3 n = merged.normal();
    const double d = -n.dot(merged.mean());
    if (clusters[a].moments.mean_sq_distance(n, d) > cfg.mse_threshold ||
        clusters[b].moments.mean_sq_distance(n, d) > cfg.mse_threshold)
      return;
    queue.push({mse, a, b, clusters[a].version, clusters[b].version});
  };
  for (auto [a, b] : graph.edges) {
    clusters[a].neighbors.push_back(b);
    clusters[b].neighbors.push_back(a);
  }
  for (auto& c : clusters) std::sort(c.neighbors.begin(), c.neighbors.end());
  for (auto [a, b] : graph.edges) push(a, b);

  while (!queue.empty()) {
    const Candidate top = queue.top();
    queue.pop();
    Cluster& ca = clusters[top.a];
    Cluster& cb = clusters[top.b];
    if (!ca.alive || !cb.alive || ca.version != top.version_a || cb.version != top.version_b) continue;

    ca.moments += cb.moments;
    ca.blocks.insert(ca.blocks.end(), cb.blocks.begin(), cb.blocks.end());
    std::vector<int> merged_nb;
    std::set_union(ca.neighbors.begin(), ca.neighbors.end(), cb.neighbors.begin(), cb.neighbors.end(),
                   std::back_inserter(merged_nb));
    std::erase_if(merged_nb, [&](int n) { return n == top.a || n == top.b; });
    ca.neighbors = std::move(merged_nb);
    ++ca.version;
    cb.alive = false;
    cb.neighbors.clear();

    for (int n : ca.neighbors) {
      auto& nb = clusters[n].neighbors;
      std::erase(nb, top.b);
      auto it = std::lower_bound(nb.begin(), nb.end(), top.a);
      if (it == nb.end() || *it != top.a) nb.insert(it, top.a);
      push(top.a, n);
    }
  }

  std::vector<int> owner(graph.nodes.size(), -1);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (clusters[c].alive)
      for (int b : clusters[c].blocks) owner[b] = static_cast<int>(c);
  // A block is interior when every in-image rook neighbor belongs to the same
  // cluster. Boundary blocks may straddle a crease with another surface.
  auto interior = [&](int b) {
    const BlockNode& node = graph.nodes[b];
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int x = node.block_x + dx[k], y = node.block_y + dy[k];
      if (x < 0 || y < 0 || x >= graph.blocks_x || y >= graph.blocks_y) continue;
      const int n = graph.lattice[static_cast<std::size_t>(y) * graph.blocks_x + x];
      if (n < 0 || owner[n] != owner[b]) return false;
    }
    return true;
  };

  std::vector<Plane> planes;
  for (const auto& c : clusters) {
    if (!c.alive || c.moments.count < cfg.min_inliers) continue;
    std::vector<int> inliers, core;
    for (int b : c.blocks) {
      const auto& px = graph.nodes[b].pixels;
      inliers.insert(inliers.end(), px.begin(), px.end());
      if (interior(b)) core.insert(core.end(), px.begin(), px.end());
    }
    // Region growing re-claims the eroded pixels against the cleaner fit.
    if (core.size() >= 3 * static_cast<std::size_t>(cfg.block_size)) {
      try {
        Plane eroded = make_plane(cloud, core);
        if (eroded.mse <= cfg.mse_threshold) {
          planes.push_back(std::move(eroded));
          continue;
        }
      } catch (const Error&) {
      }
    }
    Plane plane = make_plane(cloud, std::move(inliers));
    if (plane.mse > cfg.mse_threshold) continue;
    planes.push_back(std::move(plane));
  }
  sort_planes(planes);
  return planes;
}

std::vector<Plane> region_grow(const std::vector<Plane>& planes, const PointCloud& cloud,
                               const PlaneExtractionConfig& cfg) {
  constexpr double kTieEps = 1e-12;
  const int w = cloud.width, h = cloud.height;
  std::vector<int> label(cloud.size(), -1);
  for (std::size_t p = 0; p < planes.size(); ++p)
    for (int i : planes[p].inliers) label[i] = static_cast<int>(p);

  std::vector<std::vector<int>> members(planes.size());
  for (std::size_t p = 0; p < planes.size(); ++p) members[p] = planes[p].inliers;

  auto for_each_neighbor = [&](int idx, auto&& fn) {
    const int u = idx % w, v = idx / w;
    for (int dv = -1; dv <= 1; ++dv)
      for (int du = -1; du <= 1; ++du) {
        if (du == 0 && dv == 0) continue;
        const int nu = u + du, nv = v + dv;
        if (nu < 0 || nv < 0 || nu >= w || nv >= h) continue;
        fn(nv * w + nu);
      }
  };

  // Best-first growth: the globally closest (pixel, plane) pair is decided
  // first, so exact inliers of one plane are never claimed by a neighbor
  // that happened to reach them earlier.
  using Entry = std::tuple<double, int, int>;  // distance, plane, pixel
  auto dist_to = [&](int p, int pixel) { return std::abs(planes[p].distance(cloud.points[pixel])); };
  auto grow = [&] {
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    auto offer = [&](int pixel, int p) {
      if (label[pixel] >= 0 || !cloud.valid[pixel]) return;
      const double dist = dist_to(p, pixel);
      if (dist <= cfg.grow_distance) queue.emplace(dist, p, pixel);
    };
    for (std::size_t i = 0; i < label.size(); ++i)
      if (label[i] >= 0) for_each_neighbor(static_cast<int>(i), [&](int n) { offer(n, label[i]); });
    while (!queue.empty()) {
      const auto [dist, p, pixel] = queue.top();
      queue.pop();
      if (label[pixel] >= 0) continue;
      // Equal distances within kTieEps go to the lowest adjacent plane index.
      int best = p;
      for_each_neighbor(pixel, [&](int n) {
        const int q = label[n];
        if (q < 0 || q >= best) return;
        if (std::abs(dist_to(q, pixel) - dist) <= kTieEps) best = q;
      });
      label[pixel] = best;
      for_each_neighbor(pixel, [&](int n) { offer(n, best); });
    }
  };
  // A labeled pixel moves to an adjacent plane that fits it strictly better.
  // Every move lowers the total distance, so the sweep terminates.
  auto relax = [&] {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < label.size(); ++i) {
        const int p = label[i];
        if (p < 0) continue;
        int best = p;
        double best_dist = dist_to(p, static_cast<int>(i));
        for_each_neighbor(static_cast<int>(i), [&](int n) {
          const int q = label[n];
          if (q < 0 || q == best) return;
          const double d = dist_to(q, static_cast<int>(i));
          if (d <= cfg.grow_distance && d < best_dist - kTieEps) {
            best = q;
            best_dist = d;
          }
        });
        if (best != p) {
          label[i] = best;
          changed = true;
        }
      }
    }
  };

  // Planes squeezed below min_inliers by better-fitting neighbors are
  // dropped and their pixels handed back to growth.
  std::vector<std::uint8_t> alive(planes.size(), 1);
  for (bool dropped = true; dropped;) {
    grow();
    relax();
    std::vector<std::size_t> count(planes.size(), 0);
    for (int l : label)
      if (l >= 0) ++count[l];
    dropped = false;
    for (std::size_t p = 0; p < planes.size(); ++p) {
      if (!alive[p] || count[p] >= planes[p].inliers.size() ||
          count[p] >= static_cast<std::size_t>(cfg.min_inliers))
        continue;
      alive[p] = 0;
      dropped = true;
      for (int& l : label)
        if (l == static_cast<int>(p)) l = -1;
    }
  }
  for (auto& m : members) m.clear();
  for (std::size_t i = 0; i < label.size(); ++i)
    if (label[i] >= 0) members[label[i]].push_back(static_cast<int>(i));

  std::vector<Plane> out;
  out.reserve(planes.size());
  for (std::size_t p = 0; p < planes.size(); ++p)
    if (alive[p]) out.push_back(make_plane(cloud, std::move(members[p])));
  sort_planes(out);
  return out;
}

std::vector<Plane> merge_adjacent(const std::vector<Plane>& planes, const PointCloud& cloud,
                                  const PlaneExtractionConfig& cfg) {
  const int w = cloud.width, h = cloud.height;
  const int n = static_cast<int>(planes.size());
  std::vector<int> label(cloud.size(), -1);
  for (int p = 0; p < n; ++p)
    for (int i : planes[p].inliers) label[i] = p;

  std::vector<std::vector<std::uint8_t>> adjacent(n, std::vector<std::uint8_t>(n, 0));
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const int a = label[cloud.index(u, v)];
      if (a < 0) continue;
      const int du[4] = {1, -1, 0, 1}, dv[4] = {0, 1, 1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nu = u + du[k], nv = v + dv[k];
        if (nu < 0 || nu >= w || nv >= h) continue;
        const int b = label[cloud.index(nu, nv)];
        if (b >= 0 && b != a) adjacent[a][b] = adjacent[b][a] = 1;
      }
    }

  std::vector<PointMoments> moments(n);
  std::vector<std::vector<int>> members(n);
  std::vector<std::uint8_t> alive(n, 1);
  for (int p = 0; p < n; ++p) {
    members[p] = planes[p].inliers;
    for (int i : members[p]) moments[p].add(cloud.points[i]);
  }
  for (;;) {
    int best_a = -1, best_b = -1;
    double best = cfg.mse_threshold;
    for (int a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (int b = a + 1; b < n; ++b) {
        if (!alive[b] || !adjacent[a][b]) continue;
        PointMoments m = moments[a];
        m += moments[b];
        const double mse = m.plane_mse();
        if (mse > best || (best_a >= 0 && mse == best)) continue;
        const Vec3 nrm = m.normal();
        const double off = -nrm.dot(m.mean());
        if (moments[a].mean_sq_distance(nrm, off) > cfg.mse_threshold ||
            moments[b].mean_sq_distance(nrm, off) > cfg.mse_threshold)
          continue;
        {
          best = mse;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_a < 0) break;
    moments[best_a] += moments[best_b];
    members[best_a].insert(members[best_a].end(), members[best_b].begin(), members[best_b].end());
    members[best_b].clear();
    alive[best_b] = 0;
    for (int c = 0; c < n; ++c)
      if (adjacent[best_b][c]) adjacent[best_a][c] = adjacent[c][best_a] = 1;
    adjacent[best_a][best_a] = 0;
  }

  std::vector<Plane> out;
  for (int p = 0; p < n; ++p) {
    if (!alive[p]) continue;
    if (members[p].size() == planes[p].inliers.size()) out.push_back(planes[p]);
    else out.push_back(make_plane(cloud, std::move(members[p])));
  }
  sort_planes(out);
  return out;
}

std::vector<Plane> extract_planes(const PointCloud& cloud, const PlaneExtractionConfig& cfg) {
  const BlockGraph graph = build_block_graph(cloud, cfg);
  return merge_adjacent(region_grow(ahc_merge(graph, cloud, cfg), cloud, cfg), cloud, cfg);
}

Json plane_to_json(const Plane& plane) {
  Json j;
  j["normal"] = to_json(plane.normal);
  j["offset"] = plane.offset;
  j["mse"] = plane.mse;
  j["inlier_count"] = plane.inliers.size();
  j["centroid"] = to_json(plane.centroid);
  j["axis_std"] = to_json(plane.axis_std);
  return j;
}

}  // namespace plausible
