#include "occfof/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "occfof/bvh.hpp"
#include "occfof/errors.hpp"
#include "occfof/parallel.hpp"
#include "occfof/summation.hpp"

namespace occfof {

namespace {

constexpr int kBandRows = 16;

}  // namespace

NormalMap render_normals(const TriMesh& mesh, const OrthoFrame& frame, View view) {
  validate(mesh);
  validate(frame);
  NormalMap map(frame.width, frame.height);
  if (mesh.faces.empty()) return map;

  // Vertices in pixel space: integer (u, v) are pixel centers, w is the
  // distance toward the camera.
  const double view_sign = view == View::Front ? 1.0 : -1.0;
  std::vector<Vec3> projected(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 n = frame.to_normalized(mesh.vertices[i]);
    projected[i] = Vec3((n.x() + 1.0) * 0.5 * frame.width - 0.5,
                        (1.0 - n.y()) * 0.5 * frame.height - 0.5, view_sign * n.z());
  }

  std::vector<double> depth(static_cast<std::size_t>(frame.width) * frame.height,
                            -std::numeric_limits<double>::infinity());
  std::vector<int> owner(depth.size(), -1);
  std::vector<std::array<double, 3>> bary(depth.size());

  const std::size_t bands = (frame.height + kBandRows - 1) / kBandRows;
  // Each band owns its rows and walks all triangles in index order, so the
  // result never depends on how bands are scheduled.
  parallel_for(bands, [&](std::size_t band_begin, std::size_t band_end) {
    for (std::size_t band = band_begin; band < band_end; ++band) {
      const int row_lo = static_cast<int>(band) * kBandRows;
      const int row_hi = std::min(frame.height, row_lo + kBandRows) - 1;
      for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        const Vec3& a = projected[face[0]];
        const Vec3& b = projected[face[1]];
        const Vec3& c = projected[face[2]];
        const double vmin = std::min({a.y(), b.y(), c.y()});
        const double vmax = std::max({a.y(), b.y(), c.y()});
        const int r0 = std::max(row_lo, static_cast<int>(std::ceil(vmin)));
        const int r1 = std::min(row_hi, static_cast<int>(std::floor(vmax)));
        if (r0 > r1) continue;
        const double umin = std::min({a.x(), b.x(), c.x()});
        const double umax = std::max({a.x(), b.x(), c.x()});
        const int c0 = std::max(0, static_cast<int>(std::ceil(umin)));
        const int c1 = std::min(frame.width - 1, static_cast<int>(std::floor(umax)));
        for (int r = r0; r <= r1; ++r) {
          for (int col = c0; col <= c1; ++col) {
            std::array<double, 3> w{};
            if (!triangle_covers_2d(col, r, a, b, c, w)) continue;
            const double z = w[0] * a.z() + w[1] * b.z() + w[2] * c.z();
            const std::size_t p = static_cast<std::size_t>(r) * frame.width + col;
            if (z > depth[p]) {
              depth[p] = z;
              owner[p] = static_cast<int>(f);
              bary[p] = w;
            }
          }
        }
      }
    }
  });

  for (std::size_t p = 0; p < depth.size(); ++p) {
    if (owner[p] < 0) continue;
    const auto& face = mesh.faces[owner[p]];
    Vec3 n = Vec3::Zero();
    if (mesh.has_normals()) {
      n = bary[p][0] * mesh.normals[face[0]] + bary[p][1] * mesh.normals[face[1]] +
          bary[p][2] * mesh.normals[face[2]];
    }
    if (!(n.norm() > 0.0)) n = face_normal(mesh, static_cast<std::size_t>(owner[p]));
    const double len = n.norm();
    if (!(len > 0.0)) continue;
    n /= len;
    if (view == View::Back) n = Vec3(-n.x(), n.y(), -n.z());
    if (n.z() < 0.0) n = -n;
    map.normals[p] = n;
    map.mask.data[p] = 1;
  }
  return map;
}

Mask render_silhouette(const TriMesh& mesh, const OrthoFrame& frame) {
  return render_normals(mesh, frame, View::Front).mask;
}

double normal_map_error(const NormalMap& a, const NormalMap& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("normal maps differ in size");
  }
  const std::size_t n = a.normals.size();
  std::size_t union_count = 0;
  for (std::size_t p = 0; p < n; ++p) union_count += (a.mask.data[p] || b.mask.data[p]) ? 1 : 0;
  if (union_count == 0) return 0.0;
  const double total = pairwise_sum(0, n, [&](std::size_t p) {
    if (!(a.mask.data[p] || b.mask.data[p])) return 0.0;
    return (a.normals[p] - b.normals[p]).norm();
  });
  return 100.0 * total / static_cast<double>(union_count);
}

Image encode_normals(const NormalMap& map) {
  Image img(map.width, map.height, 3);
  for (std::size_t p = 0; p < map.normals.size(); ++p) {
    for (int ch = 0; ch < 3; ++ch) img.data[p * 3 + ch] = std::clamp(map.normals[p][ch] * 0.5 + 0.5, 0.0, 1.0);
  }
  return img;
}

}  // namespace occfof
