#include "occfof/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "occfof/errors.hpp"
#include "occfof/parallel.hpp"
#include "occfof/render.hpp"
#include "occfof/summation.hpp"
#include "occfof/surface.hpp"

namespace occfof {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return index;

  Aabb box;
  for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
  int axis = 0;
  box.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) {
                     const double a = points_[l][axis];
                     const double b = points_[r][axis];
                     return a < b || (a == b && l < r);
                   });
  const double split = points_[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[index];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return index;
}

// Left subtree holds coordinates <= split and right subtree >= split, so the
// plane distance is a valid lower bound for both.
void KdTree::search(std::uint32_t index, const Vec3& q, Nearest& best) const {
  const Node& node = nodes_[index];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t id = order_[i];
      const double d = (points_[id] - q).squaredNorm();
      if (d < best.distance_sq || (d == best.distance_sq && id < best.index)) {
        best.distance_sq = d;
        best.index = id;
      }
    }
    return;
  }
  const double delta = q[node.axis] - node.split;
  const std::uint32_t near = delta <= 0.0 ? node.left : node.right;
  const std::uint32_t far = delta <= 0.0 ? node.right : node.left;
  search(near, q, best);
  if (delta * delta <= best.distance_sq) search(far, q, best);
}

KdTree::Nearest KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) throw DomainError("nearest-neighbour query on an empty point set");
  Nearest best{points_.size(), std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

std::vector<double> nearest_distances(std::span<const Vec3> queries, const KdTree& targets) {
  std::vector<double> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = std::sqrt(targets.nearest(queries[i]).distance_sq);
    }
  });
  return out;
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw DomainError("chamfer distance needs non-empty point sets");
  const KdTree tree_a(a);
  const KdTree tree_b(b);
  const std::vector<double> ab = nearest_distances(a, tree_b);
  const std::vector<double> ba = nearest_distances(b, tree_a);
  const double mean_ab = pairwise_sum(ab) / static_cast<double>(ab.size());
  const double mean_ba = pairwise_sum(ba) / static_cast<double>(ba.size());
  return kDistanceScale * (0.5 * mean_ab + 0.5 * mean_ba);
}

double p2s(std::span<const Vec3> points, const TriMesh& mesh) {
  if (points.empty()) throw DomainError("point-to-surface distance needs points");
  if (mesh.faces.empty()) throw DomainError("point-to-surface distance needs a non-empty mesh");
  validate(mesh);
  const TriangleBvh bvh(mesh);
  std::vector<double> d(points.size());
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) d[i] = bvh.closest_point(points[i]).distance;
  });
  return kDistanceScale * pairwise_sum(d) / static_cast<double>(d.size());
}

namespace {

void check_unit_range(const Image& img) {
  for (double v : img.data) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("image values must lie in [0, 1]");
  }
}

// Per-window SSIM for every center whose window fits, averaged over
// channels; centers outside the valid band are NaN.
std::vector<double> ssim_map(const Image& a, const Image& b, int& half) {
  if (!a.same_shape(b)) throw ShapeError("images differ in shape");
  if (a.width < 1 || a.height < 1 || a.channels < 1) throw ShapeError("empty image");
  check_unit_range(a);
  check_unit_range(b);

  int size = std::min({11, a.width, a.height});
  if (size % 2 == 0) --size;
  half = size / 2;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  std::vector<double> kernel(static_cast<std::size_t>(size) * size);
  double ksum = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
      kernel[static_cast<std::size_t>(dy + half) * size + dx + half] = g;
      ksum += g;
    }
  }
  for (double& g : kernel) g /= ksum;

  std::vector<double> out(static_cast<std::size_t>(a.width) * a.height,
                          std::numeric_limits<double>::quiet_NaN());
  const int h = a.height;
  const int w = a.width;
  parallel_for(static_cast<std::size_t>(h - 2 * half), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t ri = r0; ri < r1; ++ri) {
      const int r = static_cast<int>(ri) + half;
      for (int c = half; c < w - half; ++c) {
        double acc = 0.0;
        for (int ch = 0; ch < a.channels; ++ch) {
          double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
          for (int dy = -half; dy <= half; ++dy) {
            for (int dx = -half; dx <= half; ++dx) {
              const double g = kernel[static_cast<std::size_t>(dy + half) * size + dx + half];
              const double va = a.at(r + dy, c + dx, ch);
              const double vb = b.at(r + dy, c + dx, ch);
              ma += g * va;
              mb += g * vb;
              saa += g * (va * va);
              sbb += g * (vb * vb);
              sab += g * (va * vb);
            }
          }
          const double var_a = saa - ma * ma;
          const double var_b = sbb - mb * mb;
          const double cov = sab - ma * mb;
          acc += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                 ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
        }
        out[static_cast<std::size_t>(r) * w + c] = acc / a.channels;
      }
    }
  });
  return out;
}

double mean_selected(const std::vector<double>& values, const Mask* mask) {
  std::vector<double> picked;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    if (mask && !mask->data[i]) continue;
    picked.push_back(values[i]);
  }
  if (picked.empty()) return 1.0;
  return pairwise_sum(picked) / static_cast<double>(picked.size());
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  int half = 0;
  return mean_selected(ssim_map(a, b, half), nullptr);
}

double ssim_masked(const Image& a, const Image& b, const Mask& mask) {
  if (!mask.same_size(a.width, a.height)) throw ShapeError("mask and images differ in size");
  int half = 0;
  return mean_selected(ssim_map(a, b, half), &mask);
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("images differ in shape");
  if (a.data.empty()) throw ShapeError("empty image");
  check_unit_range(a);
  check_unit_range(b);
  const double mse = pairwise_sum(0, a.data.size(), [&](std::size_t i) {
                       const double d = a.data[i] - b.data[i];
                       return d * d;
                     }) /
                     static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

MetricReport evaluate_pair(const TriMesh& recon, const TriMesh& gt, const OrthoFrame& frame,
                           std::size_t samples, std::uint64_t seed) {
  validate(recon);
  validate(gt);
  validate(frame);
  if (samples == 0) throw DomainError("sample count must be positive");
  if (recon.faces.empty() || gt.faces.empty()) throw DomainError("cannot evaluate an empty mesh");

  MetricReport report;
  report.samples = samples;
  report.seed = seed;
  report.config_hash =
      fnv1a64(format_frame(frame) + fmt::format("samples={}\nseed={}\n", samples, seed));

  const SurfaceSamples rs = sample_surface(recon, samples, seed);
  const SurfaceSamples gs = sample_surface(gt, samples, seed);
  report.chamfer = chamfer(rs.points, gs.points);
  report.p2s = p2s(rs.points, gt);

  report.normal_front = normal_map_error(render_normals(recon, frame, View::Front),
                                         render_normals(gt, frame, View::Front));
  report.normal_back = normal_map_error(render_normals(recon, frame, View::Back),
                                        render_normals(gt, frame, View::Back));
  report.normal_error = 0.5 * (report.normal_front + report.normal_back);
  return report;
}

std::string report_csv_header() {
  return "chamfer,p2s,normal_front,normal_back,normal_error,samples,seed,config_hash";
}

std::string report_csv_row(const MetricReport& r) {
  return fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{:016x}", r.chamfer, r.p2s,
                     r.normal_front, r.normal_back, r.normal_error, r.samples, r.seed,
                     r.config_hash);
}

std::string report_sidecar(const MetricReport& r) {
  return fmt::format(
      "units=centi-units (scene units x 100)\n"
      "chamfer={:.9g}\np2s={:.9g}\nnormal_front={:.9g}\nnormal_back={:.9g}\n"
      "normal_error={:.9g}\nsamples={}\nseed={}\nconfig_hash={:016x}\n",
      r.chamfer, r.p2s, r.normal_front, r.normal_back, r.normal_error, r.samples, r.seed,
      r.config_hash);
}

}  // namespace occfof
