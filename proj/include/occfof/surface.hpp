#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "occfof/encode.hpp"
#include "occfof/fof.hpp"
#include "occfof/mesh.hpp"

namespace occfof {

/// Scalar samples on a regular lattice. Sample (ix, iy, iz) sits at
/// origin + spacing .* (ix, iy, iz); spacings may be negative (image rows
/// run downward in y).
struct OccupancyGrid {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  Vec3 origin = Vec3::Zero();
  Vec3 spacing = Vec3::Ones();
  std::vector<double> values;  // x fastest, then y, then z

  std::size_t index(int ix, int iy, int iz) const noexcept {
    return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
  }
  double at(int ix, int iy, int iz) const noexcept { return values[index(ix, iy, iz)]; }
  Vec3 position(int ix, int iy, int iz) const {
    return origin + spacing.cwiseProduct(Vec3(ix, iy, iz));
  }
};

// Throws DomainError for dims < 2, wrong value count or non-finite values.
void validate(const OccupancyGrid& grid);

// Places decoded samples in the scene: column -> x, row -> y (downward),
// depth sample -> z.
OccupancyGrid to_occupancy_grid(const DecodedGrid& decoded, const OrthoFrame& frame);

/// Marching cubes over a 256-entry case table generated from the 15 classic
/// configurations. Ambiguous faces always separate the corners above `iso`,
/// a rule that depends only on the face itself, so neighbouring cubes agree
/// and closed level sets give watertight meshes. Vertices are linear
/// interpolations on lattice edges and are shared through edge keys.
/// Triangles face the side below `iso` (outward for occupancy).
TriMesh marching_cubes(const OccupancyGrid& grid, double iso = 0.5);

// Triangles (as triples of cube edge indices 0..11) for one corner
// configuration; bit i of `config` set means corner i is above iso.
const std::vector<std::array<std::uint8_t, 3>>& marching_cubes_case(int config);

struct SurfaceSamples {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // normal of the face each point was drawn from
  std::vector<int> faces;
};

// Area-weighted face choice by inverse-CDF lookup, uniform barycentric
// placement. Deterministic for a fixed seed.
SurfaceSamples sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

struct VolumeResult {
  double volume = 0.0;         // absolute value
  double signed_volume = 0.0;  // negative for inward-facing winding
  bool outward() const noexcept { return signed_volume >= 0.0; }
};

// Divergence-theorem volume; throws MeshError for non-watertight meshes.
VolumeResult mesh_volume(const TriMesh& mesh);

}  // namespace occfof
