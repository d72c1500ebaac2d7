#include "occfof/completion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "occfof/errors.hpp"

namespace occfof {

TriMesh degrade_prior(const TriMesh& mesh, int iterations, double strength) {
  validate(mesh);
  if (iterations < 0) throw DomainError("smoothing iterations must be non-negative");
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw DomainError("smoothing strength must lie in [0, 1]");
  }
  TriMesh out = mesh;
  if (iterations == 0) return out;

  // Sorted neighbour lists keep the summation order fixed.
  std::vector<std::set<int>> adjacency(mesh.vertices.size());
  for (const Face& f : mesh.faces) {
    for (int i = 0; i < 3; ++i) {
      adjacency[f[i]].insert(f[(i + 1) % 3]);
      adjacency[f[i]].insert(f[(i + 2) % 3]);
    }
  }
  std::vector<Vec3> next(out.vertices.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
      if (adjacency[v].empty()) {
        next[v] = out.vertices[v];
        continue;
      }
      Vec3 mean = Vec3::Zero();
      for (int n : adjacency[v]) mean += out.vertices[n];
      mean /= static_cast<double>(adjacency[v].size());
      next[v] = out.vertices[v] + strength * (mean - out.vertices[v]);
    }
    out.vertices.swap(next);
  }
  if (out.has_normals()) compute_vertex_normals(out);
  return out;
}

ScalarMap distance_transform(const Mask& seeds) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double diag = std::sqrt(2.0);
  const int w = seeds.width;
  const int h = seeds.height;
  ScalarMap d(w, h, kInf);
  for (std::size_t i = 0; i < seeds.data.size(); ++i) {
    if (seeds.data[i]) d.data[i] = 0.0;
  }
  auto relax = [&](int r, int c, int rr, int cc, double step) {
    if (rr < 0 || rr >= h || cc < 0 || cc >= w) return;
    d.at(r, c) = std::min(d.at(r, c), d.at(rr, cc) + step);
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      relax(r, c, r - 1, c - 1, diag);
      relax(r, c, r - 1, c, 1.0);
      relax(r, c, r - 1, c + 1, diag);
      relax(r, c, r, c - 1, 1.0);
    }
  }
  for (int r = h - 1; r >= 0; --r) {
    for (int c = w - 1; c >= 0; --c) {
      relax(r, c, r + 1, c + 1, diag);
      relax(r, c, r + 1, c, 1.0);
      relax(r, c, r + 1, c - 1, diag);
      relax(r, c, r, c + 1, 1.0);
    }
  }
  return d;
}

ScalarMap blend_weights(const MaskPair& pair, double feather_px) {
  if (!(feather_px >= 0.0)) throw DomainError("feather width must be non-negative");
  if (!pair.visible.same_size(pair.occluded.width, pair.occluded.height)) {
    throw ShapeError("visibility and occlusion masks differ in size");
  }
  ScalarMap alpha(pair.occluded.width, pair.occluded.height, 1.0);
  const ScalarMap dist = distance_transform(pair.visible);
  for (std::size_t i = 0; i < alpha.data.size(); ++i) {
    if (!pair.occluded.data[i] || pair.visible.data[i]) continue;
    alpha.data[i] = feather_px > 0.0 ? std::max(0.0, 1.0 - dist.data[i] / feather_px) : 0.0;
  }
  return alpha;
}

FourierField vgcc_blend(const FourierField& observed, const FourierField& prior,
                        const MaskPair& pair, double feather_px) {
  if (!observed.same_shape(prior)) throw ShapeError("observed and prior fields differ in shape");
  if (!pair.occluded.same_size(observed.width(), observed.height()) ||
      !pair.visible.same_size(observed.width(), observed.height())) {
    throw ShapeError("field and masks differ in size");
  }
  const ScalarMap alpha = blend_weights(pair, feather_px);
  FourierField out = observed;
  for (int r = 0; r < observed.height(); ++r) {
    for (int c = 0; c < observed.width(); ++c) {
      const double a = alpha.at(r, c);
      if (a == 1.0) continue;
      auto dst = out.pixel(r, c);
      const auto src = prior.pixel(r, c);
      for (std::size_t k = 0; k < dst.size(); ++k) {
        dst[k] = a == 0.0 ? src[k] : a * dst[k] + (1.0 - a) * src[k];
      }
    }
  }
  return out;
}

}  // namespace occfof
