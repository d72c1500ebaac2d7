#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "occfof/encode.hpp"
#include "occfof/errors.hpp"
#include "occfof/shapes.hpp"

using namespace occfof;
using namespace occfof::shapes;

namespace {

const double kSphereVolume = 4.0 / 3.0 * std::numbers::pi * 0.6 * 0.6 * 0.6;

OrthoFrame frame(int w, int h) {
  OrthoFrame f;
  f.width = w;
  f.height = h;
  return f;
}

}  // namespace

TEST(Frame, TextRoundTripAndValidation) {
  OrthoFrame f;
  f.center = Vec3(0.125, -0.3, 1.0 / 3.0);
  f.half_extent = 0.75;
  f.width = 17;
  f.height = 9;
  EXPECT_EQ(parse_frame(format_frame(f)), f);
  f.half_extent = 0.0;
  EXPECT_THROW(validate(f), DomainError);
  EXPECT_THROW(parse_frame("width = twelve\n"), ParseError);
}

TEST(RayCast, MissingRayIsEmpty) {
  const TriMesh c = cube(0.5);
  EXPECT_TRUE(ray_intervals(c, frame(8, 8), 0, 0).empty());
}

TEST(RayCast, CubeCenterPixelThroughSharedEdges) {
  // The center pixel of an odd frame lies on the diagonals of both cube
  // caps, so ownership of shared edges decides the result.
  const IntervalList iv = ray_intervals(cube(1.0), frame(9, 9), 4, 4);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_DOUBLE_EQ(iv[0].z_in, -0.5);
  EXPECT_DOUBLE_EQ(iv[0].z_out, 0.5);
}

TEST(RayCast, SphereChordAtPlanarOffset) {
  // Pixel center (x, y) = (0.3, 0) in a 10 x 11 frame.
  const OrthoFrame f = frame(10, 11);
  ASSERT_DOUBLE_EQ(f.pixel_x(6), 0.3);
  ASSERT_DOUBLE_EQ(f.pixel_y(5), 0.0);
  const IntervalList iv = ray_intervals(icosphere(0.6, 5), f, 5, 6);
  ASSERT_EQ(iv.size(), 1u);
  const double half = std::sqrt(0.36 - 0.09);
  EXPECT_NEAR(iv[0].z_in, -half, 1e-3);
  EXPECT_NEAR(iv[0].z_out, half, 1e-3);
}

TEST(RayCast, TorusAxisRayCrossesTubeTwice) {
  // The ring lies in the xz plane, so the central ray pierces the tube at
  // z = -0.5 and z = +0.5.
  const IntervalList iv = ray_intervals(torus(), frame(9, 9), 4, 4);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_NEAR(iv[0].z_in, -0.7, 2e-3);
  EXPECT_NEAR(iv[0].z_out, -0.3, 2e-3);
  EXPECT_NEAR(iv[1].z_in, 0.3, 2e-3);
  EXPECT_NEAR(iv[1].z_out, 0.7, 2e-3);
}

TEST(RayCast, RejectsOpenMesh) {
  TriMesh open = icosphere(0.6, 2);
  open.faces.pop_back();
  EXPECT_THROW(RayCaster(open, frame(4, 4)), MeshError);
}

TEST(RayCast, StackedCubesGiveSortedDisjointIntervals) {
  TriMesh stacked = translated(cube(0.4), Vec3(0, 0, -0.5));
  const TriMesh upper = translated(cube(0.4), Vec3(0, 0, 0.5));
  const int offset = static_cast<int>(stacked.vertices.size());
  stacked.vertices.insert(stacked.vertices.end(), upper.vertices.begin(), upper.vertices.end());
  for (Face fc : upper.faces) stacked.faces.push_back({fc[0] + offset, fc[1] + offset, fc[2] + offset});
  const IntervalList iv = ray_intervals(stacked, frame(9, 9), 4, 4);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_NEAR(iv[0].z_in, -0.7, 1e-12);
  EXPECT_NEAR(iv[0].z_out, -0.3, 1e-12);
  EXPECT_NEAR(iv[1].z_in, 0.3, 1e-12);
  EXPECT_NEAR(iv[1].z_out, 0.7, 1e-12);
}

TEST(MeshToFof, EmptySceneGivesZeroField) {
  const FourierField f = mesh_to_fof(TriMesh{}, frame(6, 5), BasisConfig{3});
  EXPECT_EQ(f.width(), 6);
  EXPECT_EQ(f.height(), 5);
  EXPECT_EQ(f.channels(), 7);
  for (double v : f.data()) EXPECT_EQ(v, 0.0);
}

TEST(MeshToFof, CoveredPixelsMatchIntervalEncoding) {
  const BasisConfig cfg{4};
  const FourierField f = mesh_to_fof(cube(1.0), frame(8, 8), cfg);
  const auto expected = intervals_to_coeffs(IntervalList{{-0.5, 0.5}}, cfg);
  for (int r = 2; r < 6; ++r) {
    for (int c = 2; c < 6; ++c) {
      for (int k = 0; k < cfg.channels(); ++k) EXPECT_DOUBLE_EQ(f.at(r, c, k), expected[k]);
    }
  }
  for (int k = 0; k < cfg.channels(); ++k) EXPECT_EQ(f.at(0, 0, k), 0.0);
}

TEST(MeshToFof, SphereVolumeFromConstantTerm) {
  const FourierField f = mesh_to_fof(icosphere(0.6, 4), frame(128, 128), BasisConfig{15});
  EXPECT_NEAR(field_volume(f, frame(128, 128)), kSphereVolume, 0.01 * kSphereVolume);
}

TEST(MeshToFof, SuperlevelVoxelCountMatchesSphereVolume) {
  const OrthoFrame fr = frame(128, 128);
  const FourierField f = mesh_to_fof(icosphere(0.6, 4), fr, BasisConfig{15});
  const int depth = 128;
  const DecodedGrid g = decode_grid(f, depth);
  std::size_t inside = 0;
  for (double v : g.values) inside += v > 0.5 ? 1 : 0;
  const double voxel = fr.pixel_area() * (2.0 / (depth - 1));
  EXPECT_NEAR(static_cast<double>(inside) * voxel, kSphereVolume, 0.03 * kSphereVolume);
}

TEST(MeshToFof, Deterministic) {
  const FourierField a = mesh_to_fof(capsule_figure(), frame(48, 48), BasisConfig{7});
  const FourierField b = mesh_to_fof(capsule_figure(), frame(48, 48), BasisConfig{7});
  EXPECT_EQ(a, b);
}
