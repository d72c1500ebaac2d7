#include "occfof/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "occfof/errors.hpp"
#include "occfof/surface.hpp"

namespace occfof::shapes {

TriMesh icosphere(double radius, int subdivisions, const Vec3& center) {
  if (!(radius > 0.0) || subdivisions < 0) throw DomainError("invalid icosphere parameters");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  TriMesh mesh;
  mesh.normals = v;
  mesh.vertices.reserve(v.size());
  for (const auto& p : v) mesh.vertices.push_back(center + radius * p);
  mesh.faces = std::move(f);
  return mesh;
}

TriMesh torus(double major_radius, double minor_radius, int major_segments, int minor_segments) {
  if (!(major_radius > minor_radius && minor_radius > 0.0) || major_segments < 3 ||
      minor_segments < 3) {
    throw DomainError("invalid torus parameters");
  }
  TriMesh mesh;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < major_segments; ++i) {
    const double u = two_pi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double w = two_pi * j / minor_segments;
      const Vec3 n(std::cos(w) * std::cos(u), std::sin(w), std::cos(w) * std::sin(u));
      const Vec3 ring(major_radius * std::cos(u), 0.0, major_radius * std::sin(u));
      mesh.vertices.push_back(ring + minor_radius * n);
      mesh.normals.push_back(n);
    }
  }
  auto id = [&](int i, int j) {
    return (i % major_segments) * minor_segments + (j % minor_segments);
  };
  for (int i = 0; i < major_segments; ++i) {
    for (int j = 0; j < minor_segments; ++j) {
      mesh.faces.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
      mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
    }
  }
  // Make the winding agree with the analytic outward normals.
  const Vec3 n0 = face_normal(mesh, 0);
  const auto& f0 = mesh.faces[0];
  if (n0.dot(mesh.normals[f0[0]]) < 0.0) {
    for (auto& face : mesh.faces) std::swap(face[1], face[2]);
  }
  return mesh;
}

TriMesh cube(double side, const Vec3& center) {
  if (!(side > 0.0)) throw DomainError("cube side must be positive");
  const double h = side / 2.0;
  TriMesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back(center + Vec3((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h));
  }
  // Outward winding per face.
  mesh.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return mesh;
}

std::vector<Capsule> default_figure() {
  return {
      {{0.0, -0.08, 0.0}, {0.0, 0.30, 0.0}, 0.18},     // torso
      {{0.0, 0.62, 0.0}, {0.0, 0.64, 0.0}, 0.13},      // head
      {{-0.20, 0.32, 0.0}, {-0.56, -0.06, 0.04}, 0.075},  // left arm
      {{0.20, 0.32, 0.0}, {0.56, -0.06, 0.04}, 0.075},    // right arm
      {{-0.10, -0.12, 0.0}, {-0.16, -0.80, 0.02}, 0.09},  // left leg
      {{0.10, -0.12, 0.0}, {0.16, -0.80, 0.02}, 0.09},    // right leg
  };
}

namespace {

double capsule_distance(const Capsule& c, const Vec3& p) {
  const Vec3 ab = c.b - c.a;
  const double len_sq = ab.squaredNorm();
  const double t = len_sq > 0.0 ? std::clamp((p - c.a).dot(ab) / len_sq, 0.0, 1.0) : 0.0;
  return (p - (c.a + t * ab)).norm() - c.radius;
}

}  // namespace

TriMesh capsule_union(const std::vector<Capsule>& parts, double spacing) {
  if (parts.empty() || !(spacing > 0.0)) throw DomainError("invalid capsule union parameters");
  Aabb box;
  for (const auto& c : parts) {
    box.extend(c.a - Vec3::Constant(c.radius));
    box.extend(c.a + Vec3::Constant(c.radius));
    box.extend(c.b - Vec3::Constant(c.radius));
    box.extend(c.b + Vec3::Constant(c.radius));
  }
  // Two samples of margin keep the level set away from the lattice boundary.
  const Vec3 lo = box.min - Vec3::Constant(2.0 * spacing);
  const Vec3 hi = box.max + Vec3::Constant(2.0 * spacing);
  OccupancyGrid grid;
  grid.nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / spacing)) + 1;
  grid.ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / spacing)) + 1;
  grid.nz = static_cast<int>(std::ceil((hi.z() - lo.z()) / spacing)) + 1;
  grid.origin = lo;
  grid.spacing = Vec3::Constant(spacing);
  grid.values.resize(static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz);
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        const Vec3 p = grid.position(ix, iy, iz);
        double d = std::numeric_limits<double>::infinity();
        for (const auto& c : parts) d = std::min(d, capsule_distance(c, p));
        // Inside is the high side.
        grid.values[grid.index(ix, iy, iz)] = -d;
      }
    }
  }
  TriMesh mesh = marching_cubes(grid, 0.0);
  remove_degenerate_faces(mesh);
  return mesh;
}

}  // namespace occfof::shapes
