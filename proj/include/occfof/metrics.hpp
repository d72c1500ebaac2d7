#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occfof/bvh.hpp"
#include "occfof/encode.hpp"
#include "occfof/image.hpp"
#include "occfof/mesh.hpp"

namespace occfof {

/// Static 3-d tree for exact nearest-neighbour queries: median split on the
/// widest axis of each node's bounding box, at most 16 points per leaf.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  struct Nearest {
    std::size_t index = 0;
    double distance_sq = 0.0;
  };

  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const noexcept { return points_.size(); }
  // Throws DomainError on an empty tree. Among equidistant points the lowest
  // index wins.
  Nearest nearest(const Vec3& query) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& q, Nearest& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

// Distances below are reported in centi-units (scene units times 100).
inline constexpr double kDistanceScale = 100.0;

// Nearest-neighbour distance from each query point to `targets`.
std::vector<double> nearest_distances(std::span<const Vec3> queries, const KdTree& targets);

/// Symmetric mean nearest-neighbour distance:
/// (mean_a min_b |a - b| + mean_b min_a |a - b|) / 2, times 100.
/// Throws DomainError if either set is empty.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);

// Mean exact point-to-triangle distance from each point to the mesh, times
// 100. Throws DomainError for empty inputs.
double p2s(std::span<const Vec3> points, const TriMesh& mesh);

/// Mean SSIM over all windows that fit inside the image, averaged over
/// channels. Gaussian window of 11x11 (shrunk to the largest odd size that
/// fits smaller images), deviation 1.5, C1 = 0.01^2, C2 = 0.03^2.
/// Values must lie in [0, 1] (DomainError otherwise).
double ssim(const Image& a, const Image& b);

// As ssim, restricted to windows centered on set pixels of `mask`; 1 when
// no such window exists.
double ssim_masked(const Image& a, const Image& b, const Mask& mask);

inline constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) over all values; identical images give kPsnrCap.
double psnr(const Image& a, const Image& b);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct MetricReport {
  double chamfer = 0.0;        // centi-units
  double p2s = 0.0;            // centi-units, reconstruction points to reference surface
  double normal_front = 0.0;   // normal_map_error, front view
  double normal_back = 0.0;    // normal_map_error, back view
  double normal_error = 0.0;   // mean of the two views
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

/// Samples `samples` points on each mesh with the same seed, then computes
/// chamfer, p2s (reconstruction to reference) and front/back normal map
/// errors in `frame`. The config hash covers frame, sample count and seed.
MetricReport evaluate_pair(const TriMesh& recon, const TriMesh& gt, const OrthoFrame& frame,
                           std::size_t samples = 10000, std::uint64_t seed = 0);

std::string report_csv_header();
std::string report_csv_row(const MetricReport& report);
// key=value lines with units.
std::string report_sidecar(const MetricReport& report);

}  // namespace occfof
