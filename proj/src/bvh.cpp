#include "occfof/bvh.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace occfof {

namespace {

struct P2 {
  double x;
  double y;
};

double edge_function(P2 a, P2 b, P2 q) noexcept {
  return (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
}

// Evaluates the edge function with the endpoints in lexicographic order so
// that the two triangles sharing an edge compute bit-identical magnitudes.
double canonical_edge_function(P2 a, P2 b, P2 q) noexcept {
  if (a.x < b.x || (a.x == b.x && a.y < b.y)) return edge_function(a, b, q);
  return -edge_function(b, a, q);
}

// Top-left ownership for a directed edge of a counterclockwise triangle.
bool owns_edge(double dx, double dy) noexcept { return dy < 0.0 || (dy == 0.0 && dx < 0.0); }

double box_distance_sq(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
  return d.squaredNorm();
}

}  // namespace

bool triangle_covers_2d(double x, double y, const Vec3& a, const Vec3& b, const Vec3& c,
                        std::array<double, 3>& weights) {
  const P2 p0{a.x(), a.y()};
  const P2 p1{b.x(), b.y()};
  const P2 p2{c.x(), c.y()};
  const P2 q{x, y};
  const double area = edge_function(p0, p1, p2);
  if (area == 0.0) return false;
  const double sign = area > 0.0 ? 1.0 : -1.0;

  const std::array<double, 3> w{sign * canonical_edge_function(p1, p2, q),
                                sign * canonical_edge_function(p2, p0, q),
                                sign * canonical_edge_function(p0, p1, q)};
  if (w[0] < 0.0 || w[1] < 0.0 || w[2] < 0.0) return false;

  const std::array<std::pair<P2, P2>, 3> edges{{{p1, p2}, {p2, p0}, {p0, p1}}};
  for (int i = 0; i < 3; ++i) {
    if (w[i] != 0.0) continue;
    const double dx = sign * (edges[i].second.x - edges[i].first.x);
    const double dy = sign * (edges[i].second.y - edges[i].first.y);
    if (!owns_edge(dx, dy)) return false;
  }
  const double total = w[0] + w[1] + w[2];
  if (total == 0.0) return false;
  weights = {w[0] / total, w[1] / total, w[2] / total};
  return true;
}

bool z_line_triangle(double x, double y, const Vec3& a, const Vec3& b, const Vec3& c,
                     double& depth) {
  std::array<double, 3> w{};
  if (!triangle_covers_2d(x, y, a, b, c, w)) return false;
  depth = w[0] * a.z() + w[1] * b.z() + w[2] * c.z();
  return true;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

TriangleBvh::TriangleBvh(const TriMesh& mesh) : mesh_(&mesh) {
  const auto n = static_cast<std::uint32_t>(mesh.faces.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  if (n == 0) return;
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& f = mesh.faces[i];
    centroids[i] = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
  }
  nodes_.reserve(2 * (n / kLeafSize + 1));
  build(0, n, centroids);
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end,
                                 std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto& f = mesh_->faces[order_[i]];
    for (int v : f) box.extend(mesh_->vertices[v]);
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[index].box = box;

  if (end - begin <= static_cast<std::uint32_t>(kLeafSize)) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis = 0;
  centroid_box.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t lhs, std::uint32_t rhs) {
                     const double cl = centroids[lhs][axis];
                     const double cr = centroids[rhs][axis];
                     return cl < cr || (cl == cr && lhs < rhs);
                   });
  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = left;
  nodes_[index].count = 0;
  nodes_[index].right = right;
  return index;
}

void TriangleBvh::z_line_hits(double x, double y, std::vector<double>& depths) const {
  if (nodes_.empty()) return;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (x < node.box.min.x() || x > node.box.max.x() || y < node.box.min.y() ||
        y > node.box.max.y()) {
      continue;
    }
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto& f = mesh_->faces[order_[i]];
        double depth = 0.0;
        if (z_line_triangle(x, y, mesh_->vertices[f[0]], mesh_->vertices[f[1]],
                            mesh_->vertices[f[2]], depth)) {
          depths.push_back(depth);
        }
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.first;
    }
  }
}

ClosestHit TriangleBvh::closest_point(const Vec3& p) const {
  ClosestHit best;
  if (nodes_.empty()) return best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(node.box, p) >= best_sq) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto& f = mesh_->faces[order_[i]];
        const Vec3 q = closest_point_on_triangle(p, mesh_->vertices[f[0]], mesh_->vertices[f[1]],
                                                 mesh_->vertices[f[2]]);
        const double d_sq = (q - p).squaredNorm();
        if (d_sq < best_sq || (d_sq == best_sq && static_cast<int>(order_[i]) < best.face)) {
          best_sq = d_sq;
          best.face = static_cast<int>(order_[i]);
          best.point = q;
        }
      }
    } else {
      const double dl = box_distance_sq(nodes_[node.first].box, p);
      const double dr = box_distance_sq(nodes_[node.right].box, p);
      // Push the farther child first so the nearer one is visited next.
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.first;
      } else {
        stack[top++] = node.first;
        stack[top++] = node.right;
      }
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

}  // namespace occfof
