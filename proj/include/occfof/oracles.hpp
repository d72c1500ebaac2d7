#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "occfof/fof.hpp"
#include "occfof/losses.hpp"
#include "occfof/mesh.hpp"
#include "occfof/occlusion.hpp"
#include "occfof/rng.hpp"

/// Slow, independent reference computations used to cross-check the fast
/// paths, plus seeded random instance generators.
namespace occfof::oracles {

// Composite trapezoid rule over each interval with `samples` nodes in total
// (spread in proportion to interval length, at least two per interval),
// projected onto the basis with the same normalization as
// intervals_to_coeffs.
std::vector<double> quadrature_coeffs(std::span<const Interval> intervals, const BasisConfig& cfg,
                                      std::size_t samples = 100000);

// Sorted disjoint intervals in [-1, 1]; between 0 and `max_intervals`
// of them.
IntervalList random_intervals(Rng& rng, int max_intervals = 4);

struct NearestResult {
  std::size_t index = 0;
  double distance_sq = 0.0;
};

// Exhaustive scan; ties go to the lowest index.
NearestResult brute_nearest(std::span<const Vec3> points, const Vec3& q);

// Exhaustive scan over every triangle.
double brute_point_to_mesh(const TriMesh& mesh, const Vec3& p);

// Exhaustive O(|a| |b|) chamfer, same units as chamfer().
double brute_chamfer(std::span<const Vec3> a, std::span<const Vec3> b);

std::vector<Vec3> random_cloud(Rng& rng, std::size_t n);

// Random triangle soup with `faces` faces in [-1, 1]^3.
TriMesh random_soup(Rng& rng, std::size_t faces);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double step = 1e-5);

// |a - b| / max(|a|, |b|, tiny), Euclidean norms.
double relative_error(std::span<const double> a, std::span<const double> b);

FourierField random_field(Rng& rng, int width, int height, int channels);
FeaturePyramid random_pyramid(Rng& rng, std::span<const std::array<int, 3>> shapes);
// body, then occluded = random subset of body.
MaskPair random_mask_pair(Rng& rng, int width, int height);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Reduced oracle suite for the command line self test: closed-form vs.
/// quadrature encoding, tree vs. brute force neighbours and triangle
/// distances, finite-difference loss gradients, the weight-map truth table,
/// image-metric identities and the tensor checksum.
std::vector<CheckResult> run_selftest(std::uint64_t seed);

}  // namespace occfof::oracles
