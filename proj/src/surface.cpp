#include "occfof/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "occfof/errors.hpp"
#include "occfof/parallel.hpp"
#include "occfof/rng.hpp"
#include "occfof/summation.hpp"

namespace occfof {

namespace {

// Corner i sits at (x, y, z) = kCorner[i].
constexpr std::array<std::array<int, 3>, 8> kCorner{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<std::array<int, 2>, 12> kEdgeCorners{{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Face corner cycles, counterclockwise seen from outside the cube.
constexpr std::array<std::array<int, 4>, 6> kFaceCycle{{
    {0, 3, 2, 1},  // z = 0
    {4, 5, 6, 7},  // z = 1
    {0, 1, 5, 4},  // y = 0
    {3, 7, 6, 2},  // y = 1
    {0, 4, 7, 3},  // x = 0
    {1, 2, 6, 5},  // x = 1
}};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    const auto& ec = kEdgeCorners[e];
    if ((ec[0] == a && ec[1] == b) || (ec[0] == b && ec[1] == a)) return e;
  }
  return -1;
}

bool share_face(int e0, int e1) {
  for (const auto& cycle : kFaceCycle) {
    bool has0 = false;
    bool has1 = false;
    for (int i = 0; i < 4; ++i) {
      const int e = edge_between(cycle[i], cycle[(i + 1) % 4]);
      has0 = has0 || e == e0;
      has1 = has1 || e == e1;
    }
    if (has0 && has1) return true;
  }
  return false;
}

using CaseTable = std::array<std::vector<std::array<std::uint8_t, 3>>, 256>;

// On every face, each maximal cyclic run of corners above iso contributes one
// boundary segment from the edge entering the run to the edge leaving it.
// Chaining the segments gives the cube's boundary loops, fanned into
// triangles. With this orientation the normals point away from the high
// corners.
CaseTable build_case_table() {
  CaseTable table;
  for (int config = 0; config < 256; ++config) {
    const auto high = [config](int corner) { return ((config >> corner) & 1) != 0; };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& cycle : kFaceCycle) {
      for (int i = 0; i < 4; ++i) {
        const int low_corner = cycle[i];
        const int first_high = cycle[(i + 1) % 4];
        if (high(low_corner) || !high(first_high)) continue;
        int j = (i + 1) % 4;
        while (high(cycle[(j + 1) % 4])) j = (j + 1) % 4;
        const int entry = edge_between(low_corner, first_high);
        const int exit = edge_between(cycle[j], cycle[(j + 1) % 4]);
        next[entry] = exit;
      }
    }
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || used[start]) continue;
      std::vector<int> loop;
      for (int e = start; !used[e]; e = next[e]) {
        used[e] = true;
        loop.push_back(e);
      }
      // Fan from a root whose diagonals never run along a cube face; a
      // diagonal on an ambiguous face could be chosen by the neighbouring cube
      // too, leaving an edge with four triangles.
      std::size_t root = 0;
      for (; root < loop.size(); ++root) {
        bool clean = true;
        for (std::size_t k = 2; k + 1 < loop.size(); ++k) {
          if (share_face(loop[root], loop[(root + k) % loop.size()])) clean = false;
        }
        if (clean) break;
      }
      if (root == loop.size()) root = 0;
      std::rotate(loop.begin(), loop.begin() + static_cast<std::ptrdiff_t>(root), loop.end());
      for (std::size_t k = 1; k + 1 < loop.size(); ++k) {
        table[config].push_back({static_cast<std::uint8_t>(loop[0]),
                                  static_cast<std::uint8_t>(loop[k]),
                                  static_cast<std::uint8_t>(loop[k + 1])});
      }
    }
  }
  return table;
}

const CaseTable& case_table() {
  static const CaseTable table = build_case_table();
  return table;
}

}  // namespace

const std::vector<std::array<std::uint8_t, 3>>& marching_cubes_case(int config) {
  if (config < 0 || config > 255) throw DomainError("marching cubes config out of range");
  return case_table()[config];
}

void validate(const OccupancyGrid& grid) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2) {
    throw DomainError("occupancy grid needs at least 2 samples per axis");
  }
  if (grid.values.size() != static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz) {
    throw ShapeError("occupancy grid value count does not match its dimensions");
  }
  for (double v : grid.values) {
    if (!std::isfinite(v)) throw DomainError("occupancy grid holds a non-finite value");
  }
}

OccupancyGrid to_occupancy_grid(const DecodedGrid& decoded, const OrthoFrame& frame) {
  if (decoded.width != frame.width || decoded.height != frame.height) {
    throw ShapeError("decoded grid and frame dimensions differ");
  }
  OccupancyGrid grid;
  grid.nx = decoded.width;
  grid.ny = decoded.height;
  grid.nz = decoded.depth;
  const double h = frame.half_extent;
  grid.origin = frame.center + h * Vec3(frame.pixel_x(0), frame.pixel_y(0), -1.0);
  grid.spacing = Vec3(2.0 * h / frame.width, -2.0 * h / frame.height,
                      2.0 * h / static_cast<double>(decoded.depth - 1));
  grid.values.resize(decoded.values.size());
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        grid.values[grid.index(ix, iy, iz)] = decoded.at(iy, ix, iz);
      }
    }
  }
  return grid;
}

namespace {
constexpr double kEdgeMargin = 1e-7;
}

TriMesh marching_cubes(const OccupancyGrid& grid, double iso) {
  validate(grid);
  const int nx = grid.nx;
  const int ny = grid.ny;
  const int nz = grid.nz;
  const std::size_t total = grid.values.size();
  const auto above = [&](std::size_t i) { return grid.values[i] > iso; };

  // Vertex ids for crossing lattice edges, keyed by the lower endpoint and
  // axis. Ids are assigned slab by slab (constant z of the lower endpoint), in
  // x-fastest order within a slab, so numbering never depends on threading.
  std::array<std::vector<std::int32_t>, 3> edge_vertex;
  for (auto& ids : edge_vertex) ids.assign(total, -1);
  const std::array<int, 3> dims{nx, ny, nz};
  const std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(nx),
                                          static_cast<std::size_t>(nx) * ny};

  std::vector<std::size_t> slab_count(nz, 0);
  parallel_for(nz, [&](std::size_t begin, std::size_t end) {
    for (std::size_t iz = begin; iz < end; ++iz) {
      std::size_t count = 0;
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
          const std::array<int, 3> at{ix, iy, static_cast<int>(iz)};
          const std::size_t i = grid.index(ix, iy, static_cast<int>(iz));
          for (int axis = 0; axis < 3; ++axis) {
            if (at[axis] + 1 >= dims[axis]) continue;
            if (above(i) != above(i + stride[axis])) ++count;
          }
        }
      }
      slab_count[iz] = count;
    }
  });
  std::vector<std::size_t> slab_offset(nz + 1, 0);
  std::partial_sum(slab_count.begin(), slab_count.end(), slab_offset.begin() + 1);

  TriMesh mesh;
  mesh.vertices.resize(slab_offset[nz]);
  parallel_for(nz, [&](std::size_t begin, std::size_t end) {
    for (std::size_t iz = begin; iz < end; ++iz) {
      std::size_t id = slab_offset[iz];
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
          const std::array<int, 3> at{ix, iy, static_cast<int>(iz)};
          const std::size_t i = grid.index(ix, iy, static_cast<int>(iz));
          for (int axis = 0; axis < 3; ++axis) {
            if (at[axis] + 1 >= dims[axis]) continue;
            const std::size_t j = i + stride[axis];
            if (above(i) == above(j)) continue;
            const double v0 = grid.values[i];
            const double v1 = grid.values[j];
            // Kept strictly inside the edge so that a sample lying exactly on
            // the level set cannot collapse neighbouring vertices into one
            // point (zero-area faces).
            const double t = std::clamp((iso - v0) / (v1 - v0), kEdgeMargin, 1.0 - kEdgeMargin);
            Vec3 p = grid.position(ix, iy, static_cast<int>(iz));
            p[axis] += t * grid.spacing[axis];
            mesh.vertices[id] = p;
            edge_vertex[axis][i] = static_cast<std::int32_t>(id);
            ++id;
          }
        }
      }
    }
  });

  // Lower-endpoint offsets and axis of each cube edge.
  std::array<std::array<int, 4>, 12> edge_key{};
  for (int e = 0; e < 12; ++e) {
    const auto& a = kCorner[kEdgeCorners[e][0]];
    const auto& b = kCorner[kEdgeCorners[e][1]];
    int axis = 0;
    while (a[axis] == b[axis]) ++axis;
    edge_key[e] = {std::min(a[0], b[0]), std::min(a[1], b[1]), std::min(a[2], b[2]), axis};
  }
  const bool flip = grid.spacing.x() * grid.spacing.y() * grid.spacing.z() < 0.0;

  const std::size_t cube_slabs = static_cast<std::size_t>(nz - 1);
  std::vector<std::vector<Face>> slab_faces(cube_slabs);
  parallel_for(cube_slabs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t iz = begin; iz < end; ++iz) {
      auto& faces = slab_faces[iz];
      for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix + 1 < nx; ++ix) {
          int config = 0;
          for (int c = 0; c < 8; ++c) {
            const auto& o = kCorner[c];
            if (above(grid.index(ix + o[0], iy + o[1], static_cast<int>(iz) + o[2]))) {
              config |= 1 << c;
            }
          }
          const auto& triangles = case_table()[config];
          for (const auto& tri : triangles) {
            Face face{};
            for (int k = 0; k < 3; ++k) {
              const auto& key = edge_key[tri[k]];
              face[k] = edge_vertex[key[3]][grid.index(ix + key[0], iy + key[1],
                                                       static_cast<int>(iz) + key[2])];
            }
            if (flip) std::swap(face[1], face[2]);
            faces.push_back(face);
          }
        }
      }
    }
  });
  for (auto& faces : slab_faces) {
    mesh.faces.insert(mesh.faces.end(), faces.begin(), faces.end());
  }
  return mesh;
}

SurfaceSamples sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  validate(mesh);
  if (mesh.faces.empty()) throw DomainError("cannot sample an empty mesh");
  if (count == 0) throw DomainError("sample count must be at least 1");

  std::vector<double> cumulative(mesh.faces.size());
  double running = 0.0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    running += face_area(mesh, i);
    cumulative[i] = running;
  }
  if (!(running > 0.0)) throw DomainError("mesh has zero surface area");

  SurfaceSamples out;
  out.points.reserve(count);
  out.normals.reserve(count);
  out.faces.reserve(count);
  Rng rng(seed);
  for (std::size_t s = 0; s < count; ++s) {
    const double target = rng.uniform() * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const auto face = static_cast<std::size_t>(it - cumulative.begin());
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const auto& f = mesh.faces[face];
    const Vec3 p = (1.0 - r1) * mesh.vertices[f[0]] + r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                   r1 * r2 * mesh.vertices[f[2]];
    out.points.push_back(p);
    out.normals.push_back(face_normal(mesh, face));
    out.faces.push_back(static_cast<int>(face));
  }
  return out;
}

VolumeResult mesh_volume(const TriMesh& mesh) {
  const auto report = check_watertight(mesh);
  if (!report.watertight) throw MeshError("mesh_volume requires a watertight mesh");
  const double six_v = pairwise_sum(0, mesh.faces.size(), [&](std::size_t i) {
    const auto& f = mesh.faces[i];
    return mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  });
  VolumeResult result;
  result.signed_volume = six_v / 6.0;
  result.volume = std::abs(result.signed_volume);
  return result;
}

}  // namespace occfof
