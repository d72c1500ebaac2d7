#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace occfof {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Indexed triangle mesh. `normals` is either empty or holds one unit normal
/// per vertex.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec3> normals;

  bool empty() const noexcept { return faces.empty(); }
  bool has_normals() const noexcept { return !normals.empty(); }
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }
  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
};

Aabb bounds(const TriMesh& mesh);

Vec3 face_normal(const TriMesh& mesh, std::size_t face);  // unit, zero for degenerate faces
double face_area(const TriMesh& mesh, std::size_t face);
double surface_area(const TriMesh& mesh);

// Throws ShapeError when a face index is out of range or normals are sized
// inconsistently.
void validate(const TriMesh& mesh);

// Drops faces with repeated indices or exactly zero area. Returns the number
// of faces removed.
std::size_t remove_degenerate_faces(TriMesh& mesh);

// Area-weighted vertex normals.
void compute_vertex_normals(TriMesh& mesh);

TriMesh translated(TriMesh mesh, const Vec3& offset);
TriMesh scaled(TriMesh mesh, double factor, const Vec3& origin = Vec3::Zero());
TriMesh flipped_winding(TriMesh mesh);

// Uniformly scales and translates the mesh so its tight bounding box is
// centered at the origin with largest half-extent `half_extent`.
TriMesh normalize_to_box(const TriMesh& mesh, double half_extent = 0.9);

/// Wavefront OBJ, `v`, `vn` and `f` records only. Polygons are fan
/// triangulated; other records are skipped with a warning. Throws ParseError
/// (with line number) or IoError.
TriMesh load_obj(const std::filesystem::path& path);
TriMesh parse_obj(std::string_view text);

// Coordinates are written in shortest round-trip form, so load(save(m))
// reproduces every vertex bit-for-bit.
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
std::string format_obj(const TriMesh& mesh);

struct WatertightReport {
  bool watertight = false;
  // Directed edges (a, b) whose undirected edge belongs to exactly one face.
  std::vector<std::pair<int, int>> boundary_edges;
  // Undirected edges used by more than two faces.
  std::vector<std::pair<int, int>> nonmanifold_edges;
  // Edges shared by two faces that traverse them in the same direction.
  std::vector<std::pair<int, int>> inconsistent_edges;
};

// Watertight iff every edge is shared by exactly two faces with opposite
// orientation.
WatertightReport check_watertight(const TriMesh& mesh);

}  // namespace occfof
