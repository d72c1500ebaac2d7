#pragma once

#include <Eigen/Core>
#include <string>

#include "occfof/bvh.hpp"
#include "occfof/fof.hpp"
#include "occfof/mesh.hpp"

namespace occfof {

/// Orthographic camera over the cube center +- half_extent.
///
/// Image x runs right and y up; row 0 is the top of the image. Pixel (row,
/// col) has its center at normalized coordinates
///   x = -1 + (2 col + 1) / width,   y = 1 - (2 row + 1) / height,
/// and the front view looks down -z from +z. Normalized depth z maps to
/// scene depth center.z + half_extent * z.
struct OrthoFrame {
  Vec3 center = Vec3::Zero();
  double half_extent = 1.0;
  int width = 128;
  int height = 128;

  double pixel_x(double col) const noexcept { return -1.0 + (2.0 * col + 1.0) / width; }
  double pixel_y(double row) const noexcept { return 1.0 - (2.0 * row + 1.0) / height; }

  Vec3 to_scene(const Vec3& normalized) const { return center + half_extent * normalized; }
  Vec3 to_normalized(const Vec3& scene) const { return (scene - center) / half_extent; }

  // Scene-space area covered by one pixel.
  double pixel_area() const noexcept {
    return (2.0 * half_extent / width) * (2.0 * half_extent / height);
  }

  friend bool operator==(const OrthoFrame&, const OrthoFrame&) = default;
};

// Throws DomainError unless half_extent > 0 and width, height >= 1.
void validate(const OrthoFrame& frame);

// Plain-text key=value form, one entry per line.
std::string format_frame(const OrthoFrame& frame);
OrthoFrame parse_frame(std::string_view text);

struct RayResult {
  IntervalList intervals;
  // Number of jittered recasts needed; -1 when the ray stayed odd and was
  // emptied.
  int retries = 0;
};

/// Encoder state: a BVH over a watertight mesh plus the frame. Construction
/// rejects non-watertight meshes with MeshError.
class RayCaster {
 public:
  static constexpr int kMaxRetries = 3;
  static constexpr double kJitter = 1e-4;  // pixel widths per attempt

  RayCaster(const TriMesh& mesh, const OrthoFrame& frame);

  const OrthoFrame& frame() const noexcept { return frame_; }

  // +z ray through the center of pixel (row, col); depths normalized.
  RayResult cast(int row, int col) const;

 private:
  const TriMesh& mesh_;
  OrthoFrame frame_;
  TriangleBvh bvh_;
};

IntervalList ray_intervals(const TriMesh& mesh, const OrthoFrame& frame, int row, int col);

// Per-pixel ray_intervals followed by intervals_to_coeffs.
FourierField mesh_to_fof(const TriMesh& mesh, const OrthoFrame& frame, const BasisConfig& cfg);

// Scene volume implied by channel 0: sum over pixels of 2 c_0 * half_extent
// times the pixel area.
double field_volume(const FourierField& field, const OrthoFrame& frame);

}  // namespace occfof
