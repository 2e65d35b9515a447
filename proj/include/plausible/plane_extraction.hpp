#pragma once

#include <span>
#include <vector>

#include "plausible/geometry.hpp"
#include "plausible/json_util.hpp"
#include "plausible/scene_io.hpp"

namespace plausible {

/// Fitted planar region: normal . x + offset = 0, with normal_z >= 0.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0;
  std::vector<int> inliers;  // pixel indices into the organized cloud, ascending
  double mse = 0;            // mean squared point-to-plane distance (m^2)
  Vec3 centroid = Vec3::Zero();
  Vec3 axis_std = Vec3::Zero();  // population std of inliers along world X/Y/Z

  double distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

struct PlaneExtractionConfig {
  int block_size = 10;
  double mse_threshold = 0.02 * 0.02;
  double grow_distance = 0.02;
  int min_inliers = 500;
  double depth_discontinuity = 0.05;
  // Fraction of a block's pixels that must be valid for it to become a node.
  double min_block_fill = 0.8;

  void validate() const;
};

struct PlaneFit {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0;
  double mse = 0;
};

/// Least-squares plane through the centroid. Throws DegenerateInput for fewer
/// than three points or collinear input.
PlaneFit fit_plane(std::span<const Vec3> points);

/// First and second moments of a point set; merging two sets is addition.
struct PointMoments {
  double count = 0;
  Vec3 sum = Vec3::Zero();
  Mat3 outer = Mat3::Zero();

  void add(const Vec3& p) {
    count += 1;
    sum += p;
    outer += p * p.transpose();
  }
  PointMoments& operator+=(const PointMoments& o) {
    count += o.count;
    sum += o.sum;
    outer += o.outer;
    return *this;
  }
  Vec3 mean() const { return sum / count; }
  Mat3 covariance() const { return outer / count - mean() * mean().transpose(); }
  // Smallest covariance eigenvalue, i.e. the mse of the best-fit plane.
  double plane_mse() const;
  // Unit normal of the best-fit plane (sign unspecified).
  Vec3 normal() const;
  // Mean of (n . x + d)^2 over the set.
  double mean_sq_distance(const Vec3& n, double d) const;
};

struct BlockNode {
  int block_x = 0, block_y = 0;
  std::vector<int> pixels;
  PointMoments moments;
  PlaneFit fit;
};

struct BlockGraph {
  int blocks_x = 0, blocks_y = 0;
  std::vector<BlockNode> nodes;
  std::vector<int> lattice;  // blocks_y * blocks_x, node index or -1
  std::vector<std::pair<int, int>> edges;  // rook adjacency, first < second
};

BlockGraph build_block_graph(const PointCloud& cloud, const PlaneExtractionConfig& cfg);

/// Best-first agglomerative merge of adjacent nodes. A merge is admissible
/// when the merged fit and each side's fit to the merged plane stay within
/// cfg.mse_threshold. Boundary blocks are dropped from each surviving
/// cluster before its refit.
std::vector<Plane> ahc_merge(const BlockGraph& graph, const PointCloud& cloud,
                             const PlaneExtractionConfig& cfg);

/// Pixel-wise 8-neighborhood growth followed by a refit of each plane.
std::vector<Plane> region_grow(const std::vector<Plane>& planes, const PointCloud& cloud,
                               const PlaneExtractionConfig& cfg);

/// Merges planes whose inlier sets touch (8-neighborhood) while the merged
/// fit stays within cfg.mse_threshold, cheapest pair first. Joins pieces of
/// one surface that the block lattice could not connect.
std::vector<Plane> merge_adjacent(const std::vector<Plane>& planes, const PointCloud& cloud,
                                  const PlaneExtractionConfig& cfg);

/// build_block_graph -> ahc_merge -> region_grow -> merge_adjacent.
std::vector<Plane> extract_planes(const PointCloud& cloud, const PlaneExtractionConfig& cfg);

/// Refits a plane (normal, offset, mse, centroid, axis_std) from its inliers.
Plane make_plane(const PointCloud& cloud, std::vector<int> inliers);

/// Descending inlier count, then lexicographic normal.
void sort_planes(std::vector<Plane>& planes);

Json plane_to_json(const Plane& plane);

}  // namespace plausible
