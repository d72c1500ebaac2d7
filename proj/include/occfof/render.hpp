#pragma once

#include <vector>

#include "occfof/encode.hpp"
#include "occfof/image.hpp"
#include "occfof/mesh.hpp"

namespace occfof {

/// Per-pixel unit normals in view space (z toward the viewer) with a
/// foreground mask. Background pixels hold the zero vector.
struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normals;
  Mask mask;

  NormalMap() = default;
  NormalMap(int w, int h) : width(w), height(h), normals(static_cast<std::size_t>(w) * h, Vec3::Zero()), mask(w, h) {}

  Vec3& at(int row, int col) { return normals[static_cast<std::size_t>(row) * width + col]; }
  const Vec3& at(int row, int col) const {
    return normals[static_cast<std::size_t>(row) * width + col];
  }
};

enum class View { Front, Back };

/// Orthographic z-buffer rasterization at pixel centers with top-left fill.
///
/// Front looks down -z from +z. Back looks down +z from -z, and its image
/// is mirrored in x so that both maps are pixel-aligned with the front view;
/// normals are rotated into the back camera's frame, (x, y, z) -> (-x, y, -z).
/// The normal is the interpolated and renormalized vertex normal (face normal
/// when the mesh has none), flipped if needed to face the camera.
NormalMap render_normals(const TriMesh& mesh, const OrthoFrame& frame, View view);

// Foreground coverage of the front view.
Mask render_silhouette(const TriMesh& mesh, const OrthoFrame& frame);

// Mean over the union of both foregrounds of |a - b| (unit normal vs. zero
// vector on mask disagreement gives 1), times 100. Zero if both are empty.
double normal_map_error(const NormalMap& a, const NormalMap& b);

// n * 0.5 + 0.5 per component, clamped to [0, 1]; background encodes to 0.5.
Image encode_normals(const NormalMap& map);

}  // namespace occfof
