#include "occfof/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "occfof/bvh.hpp"
#include "occfof/errors.hpp"
#include "occfof/metrics.hpp"
#include "occfof/tensor_io.hpp"

namespace occfof::oracles {

std::vector<double> quadrature_coeffs(std::span<const Interval> intervals, const BasisConfig& cfg,
                                      std::size_t samples) {
  validate(cfg);
  const int n_max = cfg.order;
  std::vector<double> c(static_cast<std::size_t>(cfg.channels()), 0.0);
  std::vector<double> cos_n(n_max + 1), sin_n(n_max + 1);
  for (const Interval& iv : intervals) {
    const double len = iv.z_out - iv.z_in;
    const auto nodes = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(static_cast<double>(samples) * len / 2.0)));
    const double h = len / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double z = i + 1 == nodes ? iv.z_out : iv.z_in + h * static_cast<double>(i);
      const double w = (i == 0 || i + 1 == nodes) ? 0.5 * h : h;
      const double ct = std::cos(std::numbers::pi * z);
      const double st = std::sin(std::numbers::pi * z);
      cos_n[0] = 1.0;
      sin_n[0] = 0.0;
      c[0] += w;
      for (int n = 1; n <= n_max; ++n) {
        cos_n[n] = cos_n[n - 1] * ct - sin_n[n - 1] * st;
        sin_n[n] = sin_n[n - 1] * ct + cos_n[n - 1] * st;
        c[2 * n - 1] += w * cos_n[n];
        c[2 * n] += w * sin_n[n];
      }
    }
  }
  // |1|^2 = 2 and |cos|^2 = |sin|^2 = 1 on [-1, 1].
  c[0] *= 0.5;
  return c;
}

IntervalList random_intervals(Rng& rng, int max_intervals) {
  const auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_intervals) + 1));
  std::vector<double> ends(2 * static_cast<std::size_t>(k));
  for (double& e : ends) e = rng.uniform(-1.0, 1.0);
  // Touch the depth range ends now and then.
  if (k > 0 && rng.below(4) == 0) ends[0] = -1.0;
  if (k > 0 && rng.below(4) == 0) ends[1] = 1.0;
  std::sort(ends.begin(), ends.end());
  IntervalList out;
  for (int i = 0; i < k; ++i) {
    const double a = ends[2 * i];
    const double b = ends[2 * i + 1];
    if (b > a && (out.empty() || a > out.back().z_out)) out.push_back({a, b});
  }
  return out;
}

NearestResult brute_nearest(std::span<const Vec3> points, const Vec3& q) {
  if (points.empty()) throw DomainError("empty point set");
  NearestResult best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - q).squaredNorm();
    if (d < best.distance_sq) best = {i, d};
  }
  return best;
}

double brute_point_to_mesh(const TriMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Face& f : mesh.faces) {
    const Vec3 q =
        closest_point_on_triangle(p, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    best = std::min(best, (q - p).squaredNorm());
  }
  return std::sqrt(best);
}

double brute_chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  auto mean_nn = [](std::span<const Vec3> from, std::span<const Vec3> to) {
    double sum = 0.0;
    for (const Vec3& p : from) sum += std::sqrt(brute_nearest(to, p).distance_sq);
    return sum / static_cast<double>(from.size());
  };
  return kDistanceScale * 0.5 * (mean_nn(a, b) + mean_nn(b, a));
}

std::vector<Vec3> random_cloud(Rng& rng, std::size_t n) {
  std::vector<Vec3> out(n);
  for (Vec3& p : out) p = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return out;
}

TriMesh random_soup(Rng& rng, std::size_t faces) {
  TriMesh m;
  for (std::size_t f = 0; f < faces; ++f) {
    const int base = static_cast<int>(m.vertices.size());
    const Vec3 center(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    for (int k = 0; k < 3; ++k) {
      m.vertices.push_back(center +
                           0.3 * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    }
    m.faces.push_back({base, base + 1, base + 2});
  }
  return m;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double step) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("vectors differ in length");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
  return std::sqrt(diff) / scale;
}

FourierField random_field(Rng& rng, int width, int height, int channels) {
  FourierField f(width, height, channels);
  for (double& v : f.data()) v = rng.uniform(-1.0, 1.0);
  return f;
}

FeaturePyramid random_pyramid(Rng& rng, std::span<const std::array<int, 3>> shapes) {
  FeaturePyramid out;
  for (const auto& s : shapes) {
    FeatureMap m(s[0], s[1], s[2]);
    for (double& v : m.values) v = rng.uniform(-1.0, 1.0);
    out.push_back(std::move(m));
  }
  return out;
}

MaskPair random_mask_pair(Rng& rng, int width, int height) {
  Mask body(width, height);
  Mask occluder(width, height);
  for (std::size_t i = 0; i < body.data.size(); ++i) {
    body.data[i] = rng.below(3) != 0 ? 1 : 0;
    occluder.data[i] = rng.below(2) != 0 ? 1 : 0;
  }
  return partition_body(body, occluder);
}

namespace {

CheckResult check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

CheckResult encode_quadrature(Rng& rng) {
  double worst = 0.0;
  for (int list = 0; list < 50; ++list) {
    const IntervalList iv = random_intervals(rng);
    const std::vector<double> q = quadrature_coeffs(iv, BasisConfig{15});
    for (int order : {1, 5, 15}) {
      const std::vector<double> c = intervals_to_coeffs(iv, BasisConfig{order});
      for (std::size_t k = 0; k < c.size(); ++k) worst = std::max(worst, std::abs(c[k] - q[k]));
    }
  }
  return check("closed-form encoding vs trapezoid quadrature", worst <= 1e-6,
               fmt::format("max abs diff {:.3e} (tol 1e-6)", worst));
}

CheckResult kd_vs_brute(Rng& rng) {
  std::size_t mismatches = 0;
  for (int cloud = 0; cloud < 10; ++cloud) {
    const auto pts = random_cloud(rng, 1 + rng.below(500));
    const KdTree tree(pts);
    for (int q = 0; q < 100; ++q) {
      const Vec3 p(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
      if (tree.nearest(p).distance_sq != brute_nearest(pts, p).distance_sq) ++mismatches;
    }
  }
  return check("kd-tree nearest neighbour vs exhaustive search", mismatches == 0,
               fmt::format("{} mismatches in 1000 queries", mismatches));
}

CheckResult bvh_vs_brute(Rng& rng) {
  double worst = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const TriMesh soup = random_soup(rng, 200);
    const TriangleBvh bvh(soup);
    for (int q = 0; q < 50; ++q) {
      const Vec3 p(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));
      worst = std::max(worst, std::abs(bvh.closest_point(p).distance - brute_point_to_mesh(soup, p)));
    }
  }
  return check("BVH point-to-triangle vs exhaustive scan", worst <= 1e-9,
               fmt::format("max abs diff {:.3e} (tol 1e-9)", worst));
}

constexpr std::array<std::array<int, 3>, 3> kPyramidShapes{{{8, 8, 3}, {4, 4, 5}, {2, 2, 7}}};

CheckResult gradient_checks(Rng& rng) {
  double worst_mse = 0.0, worst_feat = 0.0, worst_geo = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const FourierField c = random_field(rng, 4, 4, 7);
    const FourierField gt = random_field(rng, 4, 4, 7);
    const auto analytic = mse_coeff_loss(c, gt).grad;
    const auto fd = central_difference(
        [&](std::span<const double> x) {
          FourierField probe = c;
          std::copy(x.begin(), x.end(), probe.data().begin());
          return mse_coeff_loss(probe, gt).loss;
        },
        c.data());
    worst_mse = std::max(worst_mse, relative_error(analytic.data(), fd));

    const FeaturePyramid f = random_pyramid(rng, kPyramidShapes);
    const FeaturePyramid ft = random_pyramid(rng, kPyramidShapes);
    const MaskPair pair = random_mask_pair(rng, 8, 8);
    const ScalarMap omega = weight_map(pair);
    const LevelWeights w = LevelWeights::linear(f.size());
    const std::span<const ScalarMap> om(&omega, 1);

    auto flatten = [](const FeaturePyramid& p) {
      std::vector<double> out;
      for (const auto& m : p) out.insert(out.end(), m.values.begin(), m.values.end());
      return out;
    };
    auto unflatten = [](FeaturePyramid p, std::span<const double> x) {
      std::size_t at = 0;
      for (auto& m : p) {
        std::copy(x.begin() + at, x.begin() + at + m.values.size(), m.values.begin());
        at += m.values.size();
      }
      return p;
    };
    const auto feat_fd = central_difference(
        [&](std::span<const double> x) { return feat_loss(unflatten(f, x), ft, w, om).loss; },
        flatten(f));
    worst_feat = std::max(worst_feat, relative_error(flatten(feat_loss(f, ft, w, om).grad), feat_fd));

    const double lambda = 0.5 + rng.uniform();
    const GeoLoss geo = geo_loss(c, gt, f, ft, w, om, lambda);
    std::vector<double> joint(c.data().begin(), c.data().end());
    const auto ff = flatten(f);
    joint.insert(joint.end(), ff.begin(), ff.end());
    const auto geo_fd = central_difference(
        [&](std::span<const double> x) {
          FourierField probe = c;
          std::copy(x.begin(), x.begin() + c.data().size(), probe.data().begin());
          return geo_loss(probe, gt, unflatten(f, x.subspan(c.data().size())), ft, w, om, lambda)
              .loss;
        },
        joint);
    std::vector<double> geo_analytic(geo.grad_coeffs.data().begin(), geo.grad_coeffs.data().end());
    const auto gf = flatten(geo.grad_features);
    geo_analytic.insert(geo_analytic.end(), gf.begin(), gf.end());
    worst_geo = std::max(worst_geo, relative_error(geo_analytic, geo_fd));
  }
  const double worst = std::max({worst_mse, worst_feat, worst_geo});
  return check("loss gradients vs central differences", worst <= 1e-4,
               fmt::format("max relative error mse {:.2e}, feat {:.2e}, geo {:.2e} (tol 1e-4)",
                           worst_mse, worst_feat, worst_geo));
}

CheckResult weight_table() {
  int wrong = 0;
  for (int bits = 0; bits < 8; ++bits) {
    MaskPair pair{Mask(1, 1, bits & 1), Mask(1, 1, (bits >> 1) & 1), Mask(1, 1, (bits >> 2) & 1)};
    const double w = weight_map(pair, 2.0, 1.0).data[0];
    const double expected = (bits & 2) ? 2.0 : (bits & 1) ? 1.0 : 0.0;
    if (w != expected) ++wrong;
  }
  return check("weight map case table", wrong == 0, fmt::format("{} of 8 cases wrong", wrong));
}

CheckResult image_identities(Rng& rng) {
  Image a(32, 32, 3);
  for (double& v : a.data) v = rng.uniform(0.1, 0.9);
  Image b = a;
  for (double& v : b.data) v += 0.1;
  const double s = ssim(a, a);
  const double p_same = psnr(a, a);
  const double p_off = psnr(a, b);
  const bool ok = s == 1.0 && p_same == kPsnrCap && std::abs(p_off - 20.0) <= 1e-12;
  return check("image metric identities", ok,
               fmt::format("ssim(x,x)={:.17g} psnr(x,x)={} psnr(+0.1)={:.17g}", s, p_same, p_off));
}

CheckResult tensor_checksum() {
  const char* text = "123456789";
  const std::uint64_t crc =
      crc64(std::span(reinterpret_cast<const std::uint8_t*>(text), 9));
  const std::uint64_t dims[2] = {2, 3};
  const float values[6] = {0, 1, 2, 3, 4, 5};
  auto bytes = encode_tensor(dims, values);
  const Tensor back = decode_tensor(bytes);
  bool rejected = false;
  bytes[bytes.size() - 12] ^= 0x01;
  try {
    decode_tensor(bytes);
  } catch (const TensorError& e) {
    rejected = e.code() == TensorErrorCode::CrcMismatch;
  }
  const bool ok = crc == 0x995DC9BBDF1939FAull && back.data == std::vector<float>(values, values + 6) &&
                  rejected;
  return check("tensor container checksum", ok,
               fmt::format("crc64(\"123456789\")={:016x}, corrupt byte rejected: {}", crc, rejected));
}

}  // namespace

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  out.push_back(encode_quadrature(rng));
  out.push_back(kd_vs_brute(rng));
  out.push_back(bvh_vs_brute(rng));
  out.push_back(gradient_checks(rng));
  out.push_back(weight_table());
  out.push_back(image_identities(rng));
  out.push_back(tensor_checksum());
  return out;
}

}  // namespace occfof::oracles
