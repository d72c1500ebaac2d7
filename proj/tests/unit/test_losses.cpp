#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "occfof/errors.hpp"
#include "occfof/losses.hpp"
#include "occfof/occlusion.hpp"
#include "occfof/oracles.hpp"
#include "occfof/render.hpp"
#include "occfof/rng.hpp"
#include "occfof/shapes.hpp"

using namespace occfof;
using namespace occfof::shapes;

namespace {

const std::array<std::array<int, 3>, 3> kShapes{{{8, 8, 2}, {4, 4, 3}, {2, 2, 4}}};

std::vector<double> flatten(const FeaturePyramid& p) {
  std::vector<double> out;
  for (const auto& m : p) out.insert(out.end(), m.values.begin(), m.values.end());
  return out;
}

FeaturePyramid unflatten(FeaturePyramid p, std::span<const double> x) {
  std::size_t at = 0;
  for (auto& m : p) {
    for (double& v : m.values) v = x[at++];
  }
  return p;
}

FourierField with_data(FourierField f, std::span<const double> x) {
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(f.data().size()), f.data().begin());
  return f;
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(MseCoeffLoss, ZeroAtTarget) {
  Rng rng(1);
  const FourierField c = oracles::random_field(rng, 4, 3, 5);
  const CoeffLoss l = mse_coeff_loss(c, c);
  EXPECT_EQ(l.loss, 0.0);
  for (double g : l.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(MseCoeffLoss, SingleValue) {
  FourierField c(1, 1, 1), t(1, 1, 1);
  c.at(0, 0, 0) = 1.0;
  const CoeffLoss l = mse_coeff_loss(c, t);
  EXPECT_EQ(l.loss, 1.0);
  EXPECT_EQ(l.grad.at(0, 0, 0), 2.0);
  EXPECT_THROW(mse_coeff_loss(c, FourierField(1, 1, 3)), ShapeError);
}

TEST(MseCoeffLoss, GradientMatchesFiniteDifferences) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const FourierField c = oracles::random_field(rng, 8, 8, 31);
    const FourierField t = oracles::random_field(rng, 8, 8, 31);
    const auto f = [&](std::span<const double> x) { return mse_coeff_loss(with_data(c, x), t).loss; };
    const auto fd = oracles::central_difference(f, c.data());
    ASSERT_LE(oracles::relative_error(mse_coeff_loss(c, t).grad.data(), fd), 1e-6) << trial;
  }
}

TEST(FeatLoss, SimpleCases) {
  Rng rng(3);
  const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
  EXPECT_EQ(feat_loss(f, f, LevelWeights::linear(3)).loss, 0.0);

  FeaturePyramid a{FeatureMap(1, 1, 1, 3.0)}, b{FeatureMap(1, 1, 1, 1.0)};
  const FeatLoss one = feat_loss(a, b, LevelWeights{{1.0}});
  EXPECT_EQ(one.loss, 4.0);
  EXPECT_EQ(one.grad[0].values[0], 4.0);
}

TEST(FeatLoss, DeepLevelCarriesLargerWeight) {
  FeaturePyramid f{FeatureMap(4, 4, 1, 0.5), FeatureMap(1, 1, 1, 2.0)};
  FeaturePyramid t{FeatureMap(4, 4, 1, 0.5), FeatureMap(1, 1, 1, 1.0)};
  EXPECT_EQ(feat_loss(f, t, LevelWeights{{1.0, 2.0}}).loss, 2.0);
}

TEST(FeatLoss, WeightMapsSelectPixels) {
  FeaturePyramid f{FeatureMap(2, 1, 1, 1.0)}, t{FeatureMap(2, 1, 1, 0.0)};
  ScalarMap omega(2, 1);
  omega.at(0, 0) = 2.0;
  const std::array<ScalarMap, 1> maps{omega};
  const FeatLoss l = feat_loss(f, t, LevelWeights{{1.0}}, maps);
  EXPECT_EQ(l.loss, 2.0);
  EXPECT_EQ(l.grad[0].values[0], 4.0);
  EXPECT_EQ(l.grad[0].values[1], 0.0);
}

TEST(FeatLoss, SharedMapResamplesToCoarseLevels) {
  ScalarMap omega(4, 4, 0.0);
  for (int r = 0; r < 4; ++r) omega.at(r, 0) = omega.at(r, 1) = 1.0;
  FeaturePyramid f{FeatureMap(2, 2, 1, 1.0)}, t{FeatureMap(2, 2, 1, 0.0)};
  const std::array<ScalarMap, 1> maps{omega};
  const FeatLoss l = feat_loss(f, t, LevelWeights{{1.0}}, maps);
  EXPECT_EQ(l.loss, 2.0);
  EXPECT_EQ(l.grad[0].at(0, 0, 0), 2.0);
  EXPECT_EQ(l.grad[0].at(0, 1, 0), 0.0);
}

TEST(FeatLoss, RejectsNonIncreasingWeights) {
  Rng rng(4);
  const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
  EXPECT_THROW(feat_loss(f, f, LevelWeights{{1.0, 1.0, 2.0}}), DomainError);
  EXPECT_THROW(feat_loss(f, f, LevelWeights{{3.0, 2.0, 1.0}}), DomainError);
  EXPECT_THROW(feat_loss(f, f, LevelWeights{{1.0, 2.0}}), ShapeError);
  EXPECT_NO_THROW(validate(LevelWeights::linear(4)));
}

TEST(FeatLoss, PermutingLevelsWithWeightsLeavesLossUnchanged) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
    const FeaturePyramid t = oracles::random_pyramid(rng, kShapes);
    const std::vector<double> w{0.2, 0.5, 0.9};
    const std::array<int, 3> perm{2, 0, 1};
    FeaturePyramid pf, pt;
    std::vector<double> pw;
    for (int k : perm) {
      pf.push_back(f[k]);
      pt.push_back(t[k]);
      pw.push_back(w[k]);
    }
    EXPECT_NEAR(weighted_feature_loss(f, t, w).loss, weighted_feature_loss(pf, pt, pw).loss, 1e-12);
  }
}

TEST(FeatLoss, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
    const FeaturePyramid t = oracles::random_pyramid(rng, kShapes);
    const ScalarMap omega = weight_map(oracles::random_mask_pair(rng, 8, 8));
    const std::array<ScalarMap, 1> maps{omega};
    const LevelWeights w = LevelWeights::linear(3);
    const auto fn = [&](std::span<const double> x) { return feat_loss(unflatten(f, x), t, w, maps).loss; };
    const auto x = flatten(f);
    const auto fd = oracles::central_difference(fn, x);
    ASSERT_LE(oracles::relative_error(flatten(feat_loss(f, t, w, maps).grad), fd), 1e-4) << trial;
  }
}

TEST(GeoLoss, ReducesToCoefficientLossWithoutFeatures) {
  Rng rng(7);
  const FourierField c = oracles::random_field(rng, 5, 4, 7);
  const FourierField t = oracles::random_field(rng, 5, 4, 7);
  const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
  const FeaturePyramid ft = oracles::random_pyramid(rng, kShapes);
  const GeoLoss g = geo_loss(c, t, f, ft, LevelWeights::linear(3), {}, 0.0);
  const CoeffLoss m = mse_coeff_loss(c, t);
  EXPECT_EQ(g.loss, m.loss);
  EXPECT_EQ(g.grad_coeffs, m.grad);
  for (double v : flatten(g.grad_features)) EXPECT_EQ(v, 0.0);

  const GeoLoss zero = geo_loss(t, t, ft, ft, LevelWeights::linear(3), {}, 0.7);
  EXPECT_EQ(zero.loss, 0.0);
  EXPECT_THROW(geo_loss(c, t, f, ft, LevelWeights::linear(3), {}, -1.0), DomainError);
}

TEST(GeoLoss, DecomposesIntoTerms) {
  Rng rng(8);
  const FourierField c = oracles::random_field(rng, 5, 4, 7);
  const FourierField t = oracles::random_field(rng, 5, 4, 7);
  const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
  const FeaturePyramid ft = oracles::random_pyramid(rng, kShapes);
  const GeoLoss g = geo_loss(c, t, f, ft, LevelWeights::linear(3), {}, 0.3);
  EXPECT_DOUBLE_EQ(g.coeff_term, mse_coeff_loss(c, t).loss);
  EXPECT_DOUBLE_EQ(g.feature_term, feat_loss(f, ft, LevelWeights::linear(3)).loss);
  EXPECT_DOUBLE_EQ(g.loss, g.coeff_term + 0.3 * g.feature_term);
}

TEST(GeoLoss, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const FourierField c = oracles::random_field(rng, 4, 4, 7);
    const FourierField t = oracles::random_field(rng, 4, 4, 7);
    const FeaturePyramid f = oracles::random_pyramid(rng, kShapes);
    const FeaturePyramid ft = oracles::random_pyramid(rng, kShapes);
    const ScalarMap omega = weight_map(oracles::random_mask_pair(rng, 8, 8));
    const std::array<ScalarMap, 1> maps{omega};
    const LevelWeights w = LevelWeights::linear(3);
    const double lambda = rng.uniform(0.1, 2.0);
    const std::size_t nc = c.data().size();

    std::vector<double> x = to_vector(c.data());
    const auto xf = flatten(f);
    x.insert(x.end(), xf.begin(), xf.end());
    const auto fn = [&](std::span<const double> v) {
      return geo_loss(with_data(c, v), t, unflatten(f, v.subspan(nc)), ft, w, maps, lambda).loss;
    };
    const GeoLoss g = geo_loss(c, t, f, ft, w, maps, lambda);
    std::vector<double> analytic = to_vector(g.grad_coeffs.data());
    const auto gf = flatten(g.grad_features);
    analytic.insert(analytic.end(), gf.begin(), gf.end());
    ASSERT_LE(oracles::relative_error(analytic, oracles::central_difference(fn, x)), 1e-4) << trial;
  }
}

TEST(NormalLoss, IdentityAndConstantShift) {
  OrthoFrame frame;
  frame.width = frame.height = 48;
  const NormalMap n = render_normals(icosphere(0.6, 3), frame, View::Front);
  const NormalLoss same = normal_loss(n, n);
  EXPECT_EQ(same.l1, 0.0);
  EXPECT_NEAR(same.structural, 0.0, 1e-12);
  EXPECT_NEAR(same.total, 0.0, 1e-12);

  NormalMap shifted = n;
  for (std::size_t p = 0; p < shifted.normals.size(); ++p) {
    if (shifted.mask.data[p]) shifted.normals[p].x() += 0.1;
  }
  EXPECT_NEAR(normal_loss(shifted, n).l1, 0.1 / 3.0, 1e-12);
}

TEST(ImageLoss, IdentityOffsetAndSymmetry) {
  Rng rng(10);
  Image a(20, 16, 3), b(20, 16, 3);
  for (double& v : a.data) v = rng.uniform(0.0, 0.8);
  for (double& v : b.data) v = rng.uniform();
  EXPECT_NEAR(image_loss(a, a, 1.0, 1.0), 0.0, 1e-12);

  Image shifted = a;
  for (double& v : shifted.data) v += 0.2;
  EXPECT_NEAR(image_loss(shifted, a, 0.8, 0.0), 0.2 * 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(image_loss(a, b, 0.7, 0.4), image_loss(b, a, 0.7, 0.4));
  EXPECT_THROW(image_loss(a, b, -1.0, 0.0), DomainError);
}
