#pragma once

#include <span>
#include <vector>

#include "occfof/fof.hpp"
#include "occfof/image.hpp"
#include "occfof/render.hpp"

namespace occfof {

/// One level of a feature pyramid, row-major [row][col][channel].
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), values(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int row, int col, int ch) {
    return values[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return values[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  bool same_shape(const FeatureMap& o) const noexcept {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// Levels ordered shallow to deep.
using FeaturePyramid = std::vector<FeatureMap>;

/// Per-level emphasis, strictly increasing from shallow to deep.
struct LevelWeights {
  std::vector<double> w;

  // w_k = k / levels for k = 1..levels.
  static LevelWeights linear(std::size_t levels);
};

// Throws DomainError unless all weights are finite, non-negative and
// strictly increasing.
void validate(const LevelWeights& weights);

struct CoeffLoss {
  double loss = 0.0;
  FourierField grad;
};

// sum over pixels and channels of (C - C_gt)^2; gradient 2 (C - C_gt).
CoeffLoss mse_coeff_loss(const FourierField& c, const FourierField& c_gt);

struct FeatLoss {
  double loss = 0.0;
  FeaturePyramid grad;
};

/// sum_k w_k sum_x omega_k(x) |F_k(x) - F_T,k(x)|^2 with gradient
/// 2 w_k omega_k (F_k - F_T,k).
///
/// `omega` holds either one map shared by all levels or one map per level;
/// maps are resampled to each level by nearest neighbour (pixel centers).
/// An empty span means omega = 1.
FeatLoss feat_loss(const FeaturePyramid& f, const FeaturePyramid& f_t, const LevelWeights& w,
                   std::span<const ScalarMap> omega = {});

// feat_loss without the monotonicity check on `w` (weights must still be
// non-negative); used to verify index symmetry under level permutations.
FeatLoss weighted_feature_loss(const FeaturePyramid& f, const FeaturePyramid& f_t,
                               std::span<const double> w, std::span<const ScalarMap> omega = {});

struct GeoLoss {
  double loss = 0.0;
  double coeff_term = 0.0;
  double feature_term = 0.0;  // unscaled by lambda
  FourierField grad_coeffs;
  FeaturePyramid grad_features;
};

// mse_coeff_loss + lambda * feat_loss; lambda >= 0.
GeoLoss geo_loss(const FourierField& c, const FourierField& c_gt, const FeaturePyramid& f,
                 const FeaturePyramid& f_t, const LevelWeights& w, std::span<const ScalarMap> omega,
                 double lambda);

struct NormalLoss {
  double l1 = 0.0;          // mean over foreground union of mean |component difference|
  double structural = 0.0;  // 1 - SSIM of encoded normals (LPIPS substituted)
  double total = 0.0;
};

NormalLoss normal_loss(const NormalMap& n, const NormalMap& n_gt);

// lambda1 * mean |a - b| + lambda2 * (1 - SSIM(a, b)); lambdas >= 0.
double image_loss(const Image& img, const Image& img_gt, double lambda1, double lambda2);

}  // namespace occfof
