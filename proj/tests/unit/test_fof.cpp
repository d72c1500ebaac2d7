#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "occfof/errors.hpp"
#include "occfof/fof.hpp"
#include "occfof/oracles.hpp"
#include "occfof/rng.hpp"

using namespace occfof;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Basis, ValuesAtSpecialDepths) {
  const auto b0 = basis_eval(0.0, BasisConfig{1});
  ASSERT_EQ(b0.size(), 3u);
  EXPECT_EQ(b0[0], 1.0);
  EXPECT_EQ(b0[1], 1.0);
  EXPECT_EQ(b0[2], 0.0);

  const auto b1 = basis_eval(1.0, BasisConfig{1});
  EXPECT_EQ(b1[0], 1.0);
  EXPECT_NEAR(b1[1], -1.0, 1e-15);
  EXPECT_NEAR(b1[2], 0.0, 1e-15);

  const auto bh = basis_eval(0.5, BasisConfig{2});
  const double expected[] = {1.0, 0.0, 1.0, -1.0, 0.0};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(bh[k], expected[k], 1e-15) << k;
}

TEST(Basis, RejectsDepthOutsideRange) {
  EXPECT_THROW(basis_eval(1.0 + 1e-9, BasisConfig{3}), DomainError);
  EXPECT_THROW(basis_eval(-1.5, BasisConfig{3}), DomainError);
  EXPECT_THROW(basis_eval(0.0, BasisConfig{-1}), DomainError);
}

TEST(Encode, EmptyAndFullRay) {
  const auto empty = intervals_to_coeffs(IntervalList{}, BasisConfig{4});
  ASSERT_EQ(empty.size(), 9u);
  for (double c : empty) EXPECT_EQ(c, 0.0);

  const auto full = intervals_to_coeffs(IntervalList{{-1.0, 1.0}}, BasisConfig{2});
  EXPECT_DOUBLE_EQ(full[0], 1.0);
  for (int k = 1; k < 5; ++k) EXPECT_NEAR(full[k], 0.0, 1e-15);
}

TEST(Encode, HalfRayClosedForm) {
  const auto c = intervals_to_coeffs(IntervalList{{0.0, 0.5}}, BasisConfig{1});
  EXPECT_NEAR(c[0], 0.25, 1e-15);
  EXPECT_NEAR(c[1], 1.0 / kPi, 1e-15);
  EXPECT_NEAR(c[2], 1.0 / kPi, 1e-15);
}

// Trapezoid quadrature computed offline with 1e5 nodes per interval.
TEST(Encode, MatchesFrozenQuadrature) {
  const double frozen[] = {0.525,
                           0.2556732716315249,
                           0.002624391596925457,
                           -0.5250386734882253,
                           0.12394481775660457,
                           -0.17056009040123488,
                           0.09126691639890683,
                           5.0306980803327406e-17,
                           0.04918158213459545,
                           -0.17233977018105007,
                           0.10867779298388903};
  const auto c = intervals_to_coeffs(IntervalList{{-0.7, -0.2}, {0.1, 0.65}}, BasisConfig{5});
  ASSERT_EQ(c.size(), 11u);
  for (int k = 0; k < 11; ++k) EXPECT_NEAR(c[k], frozen[k], 1e-6) << k;
}

TEST(Encode, MatchesQuadratureOnRandomLists) {
  Rng rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const BasisConfig cfg{trial % 3 == 0 ? 1 : (trial % 3 == 1 ? 5 : 15)};
    const IntervalList iv = oracles::random_intervals(rng);
    const auto closed = intervals_to_coeffs(iv, cfg);
    const auto quad = oracles::quadrature_coeffs(iv, cfg);
    for (std::size_t k = 0; k < closed.size(); ++k) ASSERT_NEAR(closed[k], quad[k], 1e-6);
  }
}

TEST(Encode, RejectsMalformedIntervals) {
  EXPECT_THROW(intervals_to_coeffs(IntervalList{{0.5, 0.2}}, BasisConfig{2}), DomainError);
  EXPECT_THROW(intervals_to_coeffs(IntervalList{{-0.5, 0.2}, {0.1, 0.4}}, BasisConfig{2}),
               DomainError);
  EXPECT_THROW(intervals_to_coeffs(IntervalList{{-1.2, 0.2}}, BasisConfig{2}), DomainError);
}

TEST(Decode, SimpleSeries) {
  const double one[] = {1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(decode_ray(one, 0.3, BasisConfig{1}), 1.0);
  const double zero[] = {0.0, 0.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(decode_ray(zero, -0.7, BasisConfig{2}), 0.0);
}

TEST(Decode, HalfRayThresholdsAwayFromEdges) {
  const BasisConfig cfg{15};
  const auto c = intervals_to_coeffs(IntervalList{{0.0, 0.5}}, cfg);
  EXPECT_GT(decode_ray(c, 0.25, cfg), 0.5);
  EXPECT_LT(decode_ray(c, 0.75, cfg), 0.5);
  EXPECT_LT(decode_ray(c, -0.5, cfg), 0.5);
}

TEST(Decode, GridOfConstantAndZeroFields) {
  FourierField f(1, 1, 3);
  f.at(0, 0, 0) = 1.0;
  const DecodedGrid g = decode_grid(f, 4);
  ASSERT_EQ(g.values.size(), 4u);
  for (double v : g.values) EXPECT_DOUBLE_EQ(v, 1.0);

  const DecodedGrid z = decode_grid(FourierField(3, 2, 5), 6);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(Decode, GridMatchesPerRayDecoding) {
  Rng rng(77);
  const FourierField f = oracles::random_field(rng, 5, 4, 7);
  const DecodedGrid g = decode_grid(f, 9);
  const BasisConfig cfg{3};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) {
      for (int k = 0; k < 9; ++k) {
        EXPECT_NEAR(g.at(r, c, k), decode_ray(f.pixel(r, c), depth_sample(k, 9), cfg), 1e-12);
      }
    }
  }
}

TEST(Parseval, EnergyValuesAndBound) {
  const double one[] = {1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(parseval_energy(one), 2.0);
  const double zero[] = {0.0, 0.0, 0.0};
  EXPECT_EQ(parseval_energy(zero), 0.0);

  const auto c = intervals_to_coeffs(IntervalList{{0.0, 0.5}}, BasisConfig{1});
  const double e = parseval_energy(c);
  EXPECT_NEAR(e, 2 * 0.0625 + 2 / (kPi * kPi), 1e-12);
  EXPECT_NEAR(e, 0.32764, 1e-5);
  EXPECT_LE(e, 0.5);
}

TEST(Parseval, BoundedByOccupiedLengthOnRandomLists) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const IntervalList iv = oracles::random_intervals(rng);
    const auto c = intervals_to_coeffs(iv, BasisConfig{15});
    EXPECT_LE(parseval_energy(c), occupied_length(iv) + 1e-12);
  }
}
