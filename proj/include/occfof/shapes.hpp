#pragma once

#include "occfof/mesh.hpp"

namespace occfof::shapes {

// Subdivided icosahedron projected onto the sphere, with analytic normals.
TriMesh icosphere(double radius = 0.6, int subdivisions = 4, const Vec3& center = Vec3::Zero());

// Ring in the xz-plane around the y axis.
TriMesh torus(double major_radius = 0.5, double minor_radius = 0.2, int major_segments = 128,
              int minor_segments = 64);

// Axis-aligned cube with the given edge length.
TriMesh cube(double side = 1.0, const Vec3& center = Vec3::Zero());

struct Capsule {
  Vec3 a;
  Vec3 b;
  double radius;
};

// Default humanoid: torso, head and four limbs, about 1.8 units tall along y.
std::vector<Capsule> default_figure();

// Boundary of a union of capsules, extracted with marching cubes from the
// union's signed distance sampled at `spacing`.
TriMesh capsule_union(const std::vector<Capsule>& parts, double spacing = 0.01);

inline TriMesh capsule_figure(double spacing = 0.01) {
  return capsule_union(default_figure(), spacing);
}

}  // namespace occfof::shapes
