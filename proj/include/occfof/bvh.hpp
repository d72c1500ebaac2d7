#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "occfof/mesh.hpp"

namespace occfof {

struct ClosestHit {
  double distance = std::numeric_limits<double>::infinity();
  int face = -1;
  Vec3 point = Vec3::Zero();
};

// Closest point on triangle (a, b, c) to p, classifying p against the vertex,
// edge and face Voronoi regions.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Bounding-volume hierarchy over a mesh's triangles: median split on the
/// widest centroid axis, at most four triangles per leaf.
///
/// The mesh must outlive the hierarchy. All queries are const and safe to
/// call concurrently.
class TriangleBvh {
 public:
  static constexpr int kLeafSize = 4;

  explicit TriangleBvh(const TriMesh& mesh);

  const TriMesh& mesh() const noexcept { return *mesh_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Depths of all intersections between the mesh and the line
  // {(x, y, t) : t real}, unsorted. Points on shared edges and vertices are
  // claimed by exactly one triangle of a consistently oriented surface (top-left
  // ownership on canonically ordered edge functions), so closed meshes
  // produce an even count for rays that do not graze a silhouette.
  void z_line_hits(double x, double y, std::vector<double>& depths) const;

  ClosestHit closest_point(const Vec3& p) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first index into order_; inner: left child
    std::uint32_t count = 0;  // leaf: triangle count; inner: 0
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  const TriMesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

// Coverage of point (x, y) by the projected triangle (a, b, c) with
// deterministic top-left ownership of shared edges and vertices. On success
// `weights` holds the barycentric weights of a, b, c (summing to one).
bool triangle_covers_2d(double x, double y, const Vec3& a, const Vec3& b, const Vec3& c,
                        std::array<double, 3>& weights);

// Exact hit test of the vertical line through (x, y) against one triangle.
// Returns true and the hit depth if the triangle owns the point.
bool z_line_triangle(double x, double y, const Vec3& a, const Vec3& b, const Vec3& c,
                     double& depth);

}  // namespace occfof
