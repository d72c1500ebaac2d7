#include "occfof/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "occfof/errors.hpp"
#include "occfof/rng.hpp"

namespace occfof {

namespace {

void require_same_size(const Mask& a, const Mask& b, const char* what) {
  if (a.width != b.width || a.height != b.height) throw ShapeError(what);
}

// Occluder footprint as a function of a scale parameter; coverage grows
// monotonically with scale.
struct Placement {
  OccluderKind kind = OccluderKind::Rectangle;
  OccluderAnchor anchor = OccluderAnchor::Interior;
  double cx = 0.0;  // center in pixel coordinates (col, row)
  double cy = 0.0;
  double aspect = 1.0;
  double angle = 0.0;

  bool contains(double scale, double x, double y, int width, int height) const {
    switch (anchor) {
      case OccluderAnchor::Left:
        return x < scale * width;
      case OccluderAnchor::Right:
        return x >= (1.0 - scale) * width;
      case OccluderAnchor::Top:
        return y < scale * height;
      case OccluderAnchor::Bottom:
        return y >= (1.0 - scale) * height;
      case OccluderAnchor::Interior:
        break;
    }
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = c * dx + s * dy;
    const double v = -s * dx + c * dy;
    const double half_u = scale * std::sqrt(aspect);
    const double half_v = scale / std::sqrt(aspect);
    switch (kind) {
      case OccluderKind::Rectangle:
        return std::abs(dx) <= half_u && std::abs(dy) <= half_v;
      case OccluderKind::Ellipse: {
        if (half_u <= 0.0 || half_v <= 0.0) return false;
        const double eu = u / half_u;
        const double ev = v / half_v;
        return eu * eu + ev * ev <= 1.0;
      }
      case OccluderKind::Capsule: {
        // Segment along u with half-length half_u and radius half_v / 2.
        const double radius = 0.5 * half_v;
        const double t = std::clamp(u, -half_u, half_u);
        const double du = u - t;
        return du * du + v * v <= radius * radius;
      }
    }
    return false;
  }
};

Mask footprint(const Placement& placement, double scale, int width, int height) {
  Mask out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      out.at(r, c) = placement.contains(scale, c + 0.5, r + 0.5, width, height) ? 1 : 0;
    }
  }
  return out;
}

std::size_t covered(const Mask& body, const Placement& placement, double scale) {
  std::size_t n = 0;
  for (int r = 0; r < body.height; ++r) {
    for (int c = 0; c < body.width; ++c) {
      if (body.at(r, c) && placement.contains(scale, c + 0.5, r + 0.5, body.width, body.height)) {
        ++n;
      }
    }
  }
  return n;
}

Placement place(const Mask& body, const OccluderSpec& spec, std::uint64_t seed) {
  Placement p;
  p.kind = spec.kind;
  p.anchor = spec.anchor;
  if (spec.anchor != OccluderAnchor::Interior) return p;
  Rng rng(seed);
  std::vector<std::size_t> pixels;
  for (std::size_t i = 0; i < body.data.size(); ++i) {
    if (body.data[i]) pixels.push_back(i);
  }
  const std::size_t pick = pixels[rng.below(pixels.size())];
  p.cx = static_cast<double>(pick % body.width) + 0.5;
  p.cy = static_cast<double>(pick / body.width) + 0.5;
  p.aspect = std::exp(rng.uniform(-std::numbers::ln2, std::numbers::ln2));
  p.angle = spec.kind == OccluderKind::Rectangle ? 0.0 : rng.uniform(0.0, std::numbers::pi);
  return p;
}

// Largest scale ever needed: the footprint then contains the whole image.
double max_scale(const Placement& p, int width, int height) {
  if (p.anchor != OccluderAnchor::Interior) return 1.0;
  const double diag = std::hypot(width, height);
  const double slack = std::sqrt(2.0);  // capsule radius is half the minor half-axis
  return 2.0 * diag * slack * std::sqrt(std::max(p.aspect, 1.0 / p.aspect)) + 1.0;
}

}  // namespace

double MaskPair::occlusion_ratio() const {
  const std::size_t b = body.count();
  return b == 0 ? 0.0 : static_cast<double>(occluded.count()) / static_cast<double>(b);
}

void validate(const MaskPair& pair) {
  require_same_size(pair.visible, pair.body, "visibility mask and body differ in size");
  require_same_size(pair.occluded, pair.body, "occlusion mask and body differ in size");
  for (std::size_t i = 0; i < pair.body.data.size(); ++i) {
    const bool v = pair.visible.data[i] != 0;
    const bool m = pair.occluded.data[i] != 0;
    const bool b = pair.body.data[i] != 0;
    if ((v && m) || ((v || m) != b)) {
      throw DomainError("visible and occluded masks do not partition the body");
    }
  }
}

MaskPair partition_body(const Mask& body, const Mask& occluder) {
  require_same_size(occluder, body, "occluder and body differ in size");
  MaskPair pair{Mask(body.width, body.height), Mask(body.width, body.height), body};
  for (std::size_t i = 0; i < body.data.size(); ++i) {
    const bool b = body.data[i] != 0;
    const bool m = b && occluder.data[i] != 0;
    pair.body.data[i] = b ? 1 : 0;
    pair.occluded.data[i] = m ? 1 : 0;
    pair.visible.data[i] = (b && !m) ? 1 : 0;
  }
  return pair;
}

MaskPair synthesize_occlusion(const Mask& body, const OccluderSpec& spec) {
  const std::size_t body_count = body.count();
  if (body_count == 0) throw DomainError("body mask is empty");
  if (!(spec.ratio >= 0.0 && spec.ratio <= 0.95)) {
    throw DomainError("occlusion ratio must lie in [0, 0.95]");
  }
  if (spec.anchor != OccluderAnchor::Interior && spec.kind != OccluderKind::Rectangle) {
    throw DomainError("border anchors are only defined for rectangle occluders");
  }
  if (spec.ratio == 0.0) return partition_body(body, Mask(body.width, body.height));

  const double target = spec.ratio * static_cast<double>(body_count);
  const int attempts = spec.anchor == OccluderAnchor::Interior ? 1 + kMaxReseeds : 1;
  double best_error = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const std::uint64_t seed = attempt == 0 ? spec.seed : derive_seed(spec.seed, attempt);
    const Placement p = place(body, spec, seed);
    double lo = 0.0;
    double hi = max_scale(p, body.width, body.height);
    std::size_t n_lo = covered(body, p, lo);
    std::size_t n_hi = covered(body, p, hi);
    for (int it = 0; it < kBisectionIterations && n_hi > n_lo; ++it) {
      const double mid = 0.5 * (lo + hi);
      const std::size_t n_mid = covered(body, p, mid);
      if (static_cast<double>(n_mid) < target) {
        lo = mid;
        n_lo = n_mid;
      } else {
        hi = mid;
        n_hi = n_mid;
      }
    }
    const double e_lo = std::abs(static_cast<double>(n_lo) - target);
    const double e_hi = std::abs(static_cast<double>(n_hi) - target);
    const double scale = e_lo < e_hi ? lo : hi;
    const double error = std::min(e_lo, e_hi) / static_cast<double>(body_count);
    if (error <= kRatioTolerance) {
      return partition_body(body, footprint(p, scale, body.width, body.height));
    }
    best_error = std::min(best_error, error);
    spdlog::debug("occluder placement {} missed target ratio {} by {}", attempt, spec.ratio,
                  error);
  }
  throw DomainError("occlusion ratio " + std::to_string(spec.ratio) +
                    " unreachable; best placement missed by " + std::to_string(best_error));
}

ScalarMap weight_map(const MaskPair& pair, double lambda_occ, double lambda_vis) {
  if (!(lambda_vis >= 0.0) || !(lambda_occ >= 0.0)) {
    throw DomainError("weights must be non-negative");
  }
  if (lambda_occ < lambda_vis) throw DomainError("lambda_occ must be at least lambda_vis");
  require_same_size(pair.visible, pair.occluded, "visibility and occlusion masks differ in size");
  ScalarMap w(pair.occluded.width, pair.occluded.height);
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    if (pair.occluded.data[i]) {
      w.data[i] = lambda_occ;
    } else if (pair.visible.data[i]) {
      w.data[i] = lambda_vis;
    }
  }
  return w;
}

FourierField occlude_field(const FourierField& field, const MaskPair& pair,
                           const FieldCorruption& policy) {
  if (!pair.occluded.same_size(field.width(), field.height())) {
    throw ShapeError("field and occlusion mask differ in size");
  }
  if (policy.kind == FieldCorruption::Kind::Noise && !(policy.sigma >= 0.0)) {
    throw DomainError("noise deviation must be non-negative");
  }
  FourierField out = field;
  Rng rng(policy.seed);
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      if (!pair.occluded.at(r, c)) continue;
      auto px = out.pixel(r, c);
      for (double& v : px) {
        v = policy.kind == FieldCorruption::Kind::Zero ? 0.0 : v + policy.sigma * rng.normal();
      }
    }
  }
  return out;
}

Image occlude_image(const Image& image, const MaskPair& pair, const ImageFill& fill) {
  if (!pair.occluded.same_size(image.width, image.height)) {
    throw ShapeError("image and occlusion mask differ in size");
  }
  if (fill.kind == ImageFill::Kind::Pattern && fill.block < 1) {
    throw DomainError("pattern block size must be positive");
  }
  Image out = image;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      if (!pair.occluded.at(r, c)) continue;
      if (fill.kind == ImageFill::Kind::Gray) {
        for (int ch = 0; ch < image.channels; ++ch) out.at(r, c, ch) = 0.5;
        continue;
      }
      const std::uint64_t blocks_x = (image.width + fill.block - 1) / fill.block;
      const std::uint64_t block = (r / fill.block) * blocks_x + (c / fill.block);
      Rng rng(derive_seed(fill.seed, block));
      for (int ch = 0; ch < image.channels; ++ch) out.at(r, c, ch) = rng.uniform();
    }
  }
  return out;
}

}  // namespace occfof
