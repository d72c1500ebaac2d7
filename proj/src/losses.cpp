#include "occfof/losses.hpp"

#include <algorithm>
#include <cmath>

#include "occfof/errors.hpp"
#include "occfof/metrics.hpp"
#include "occfof/summation.hpp"

namespace occfof {

namespace {

void check_pyramids(const FeaturePyramid& f, const FeaturePyramid& f_t) {
  if (f.size() != f_t.size()) throw ShapeError("feature pyramids differ in level count");
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f[k].same_shape(f_t[k])) throw ShapeError("feature level shapes differ");
    if (f[k].values.size() !=
        static_cast<std::size_t>(f[k].width) * f[k].height * f[k].channels) {
      throw ShapeError("feature level value count does not match its shape");
    }
    for (std::size_t i = 0; i < f[k].values.size(); ++i) {
      if (!std::isfinite(f[k].values[i]) || !std::isfinite(f_t[k].values[i])) {
        throw DomainError("feature values must be finite");
      }
    }
  }
}

// Nearest-neighbour lookup of `omega` at level resolution (w, h).
double omega_at(const ScalarMap& omega, int w, int h, int row, int col) {
  const int r = std::min(omega.height - 1, static_cast<int>((row + 0.5) * omega.height / h));
  const int c = std::min(omega.width - 1, static_cast<int>((col + 0.5) * omega.width / w));
  return omega.at(r, c);
}

const ScalarMap* omega_for_level(std::span<const ScalarMap> omega, std::size_t levels,
                                 std::size_t k) {
  if (omega.empty()) return nullptr;
  if (omega.size() == 1) return &omega[0];
  if (omega.size() != levels) throw ShapeError("need one weight map or one per level");
  return &omega[k];
}

Mask foreground_union(const NormalMap& a, const NormalMap& b) {
  Mask m(a.width, a.height);
  for (std::size_t p = 0; p < m.data.size(); ++p) {
    m.data[p] = (a.mask.data[p] || b.mask.data[p]) ? 1 : 0;
  }
  return m;
}

}  // namespace

LevelWeights LevelWeights::linear(std::size_t levels) {
  LevelWeights out;
  out.w.resize(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    out.w[k] = static_cast<double>(k + 1) / static_cast<double>(levels);
  }
  return out;
}

void validate(const LevelWeights& weights) {
  for (std::size_t k = 0; k < weights.w.size(); ++k) {
    if (!std::isfinite(weights.w[k]) || weights.w[k] < 0.0) {
      throw DomainError("level weights must be finite and non-negative");
    }
    if (k > 0 && !(weights.w[k] > weights.w[k - 1])) {
      throw DomainError("level weights must be strictly increasing");
    }
  }
}

CoeffLoss mse_coeff_loss(const FourierField& c, const FourierField& c_gt) {
  if (!c.same_shape(c_gt)) throw ShapeError("coefficient fields differ in shape");
  CoeffLoss out{0.0, FourierField(c.width(), c.height(), c.channels())};
  const auto a = c.data();
  const auto b = c_gt.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < a.size(); ++i) g[i] = 2.0 * (a[i] - b[i]);
  out.loss = pairwise_sum(0, a.size(), [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  });
  return out;
}

FeatLoss weighted_feature_loss(const FeaturePyramid& f, const FeaturePyramid& f_t,
                               std::span<const double> w, std::span<const ScalarMap> omega) {
  check_pyramids(f, f_t);
  if (w.size() != f.size()) throw ShapeError("one level weight per pyramid level required");
  for (double wk : w) {
    if (!std::isfinite(wk) || wk < 0.0) throw DomainError("level weights must be non-negative");
  }
  for (const ScalarMap& m : omega) {
    if (m.width < 1 || m.height < 1) throw ShapeError("empty weight map");
    for (double v : m.data) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError("weight map must be non-negative");
    }
  }

  FeatLoss out;
  out.grad.reserve(f.size());
  std::vector<double> level_terms(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const FeatureMap& a = f[k];
    const FeatureMap& b = f_t[k];
    const ScalarMap* om = omega_for_level(omega, f.size(), k);
    FeatureMap g(a.width, a.height, a.channels);
    const std::size_t pixels = static_cast<std::size_t>(a.width) * a.height;
    std::vector<double> pixel_omega(pixels, 1.0);
    if (om) {
      for (int r = 0; r < a.height; ++r) {
        for (int col = 0; col < a.width; ++col) {
          pixel_omega[static_cast<std::size_t>(r) * a.width + col] =
              omega_at(*om, a.width, a.height, r, col);
        }
      }
    }
    const auto ch = static_cast<std::size_t>(a.channels);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      g.values[i] = 2.0 * w[k] * pixel_omega[i / ch] * (a.values[i] - b.values[i]);
    }
    level_terms[k] = pairwise_sum(0, pixels, [&](std::size_t p) {
      double sq = 0.0;
      for (std::size_t c = 0; c < ch; ++c) {
        const double d = a.values[p * ch + c] - b.values[p * ch + c];
        sq += d * d;
      }
      return pixel_omega[p] * sq;
    });
    out.grad.push_back(std::move(g));
  }
  out.loss = pairwise_sum(0, f.size(), [&](std::size_t k) { return w[k] * level_terms[k]; });
  return out;
}

FeatLoss feat_loss(const FeaturePyramid& f, const FeaturePyramid& f_t, const LevelWeights& w,
                   std::span<const ScalarMap> omega) {
  validate(w);
  return weighted_feature_loss(f, f_t, w.w, omega);
}

GeoLoss geo_loss(const FourierField& c, const FourierField& c_gt, const FeaturePyramid& f,
                 const FeaturePyramid& f_t, const LevelWeights& w, std::span<const ScalarMap> omega,
                 double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("feature loss balance must be non-negative");
  }
  CoeffLoss coeff = mse_coeff_loss(c, c_gt);
  FeatLoss feat = feat_loss(f, f_t, w, omega);
  GeoLoss out;
  out.coeff_term = coeff.loss;
  out.feature_term = feat.loss;
  out.loss = coeff.loss + lambda * feat.loss;
  out.grad_coeffs = std::move(coeff.grad);
  out.grad_features = std::move(feat.grad);
  for (FeatureMap& g : out.grad_features) {
    for (double& v : g.values) v *= lambda;
  }
  return out;
}

NormalLoss normal_loss(const NormalMap& n, const NormalMap& n_gt) {
  if (n.width != n_gt.width || n.height != n_gt.height) {
    throw ShapeError("normal maps differ in size");
  }
  const Mask fg = foreground_union(n, n_gt);
  const std::size_t count = fg.count();
  NormalLoss out;
  if (count == 0) return out;
  const double sum = pairwise_sum(0, fg.data.size(), [&](std::size_t p) {
    if (!fg.data[p]) return 0.0;
    return (n.normals[p] - n_gt.normals[p]).cwiseAbs().sum() / 3.0;
  });
  out.l1 = sum / static_cast<double>(count);
  out.structural = 1.0 - ssim_masked(encode_normals(n), encode_normals(n_gt), fg);
  out.total = out.l1 + out.structural;
  return out;
}

double image_loss(const Image& img, const Image& img_gt, double lambda1, double lambda2) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw DomainError("loss weights must be non-negative");
  if (!img.same_shape(img_gt)) throw ShapeError("images differ in shape");
  if (img.data.empty()) return 0.0;
  const double l1 = pairwise_sum(0, img.data.size(), [&](std::size_t i) {
                      return std::abs(img.data[i] - img_gt.data[i]);
                    }) /
                    static_cast<double>(img.data.size());
  double total = lambda1 * l1;
  if (lambda2 > 0.0) total += lambda2 * (1.0 - ssim(img, img_gt));
  return total;
}

}  // namespace occfof
