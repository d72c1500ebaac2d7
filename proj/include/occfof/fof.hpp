#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace occfof {

/// Truncation order of the depth-wise Fourier series.
///
/// The basis on z in [-1, 1] is {1, cos(pi z), sin(pi z), ..., cos(N pi z),
/// sin(N pi z)}, so a field with order N carries K = 2N + 1 channels.
/// Channel layout: 0 is the constant term, 2n-1 is cos(n pi z), 2n is
/// sin(n pi z).
struct BasisConfig {
  int order = 15;

  constexpr int channels() const noexcept { return 2 * order + 1; }
};

// Throws DomainError when order < 0.
void validate(const BasisConfig& cfg);

/// One occupied depth range (z_in, z_out) along a ray, in normalized depth.
struct Interval {
  double z_in = 0.0;
  double z_out = 0.0;

  double length() const noexcept { return z_out - z_in; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using IntervalList = std::vector<Interval>;

// Throws DomainError unless -1 <= z_in < z_out <= 1 and the intervals are
// sorted and pairwise disjoint.
void validate(std::span<const Interval> intervals);

double occupied_length(std::span<const Interval> intervals) noexcept;

/// Per-pixel coefficient stacks, row-major [row][col][channel].
class FourierField {
 public:
  FourierField() = default;
  FourierField(int width, int height, int channels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<double> pixel(int row, int col) noexcept {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> pixel(int row, int col) const noexcept {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }
  double& at(int row, int col, int channel) noexcept { return data_[offset(row, col) + channel]; }
  double at(int row, int col, int channel) const noexcept {
    return data_[offset(row, col) + channel];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const FourierField& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const FourierField&, const FourierField&) = default;

 private:
  std::size_t offset(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Dense occupancy samples [row][col][depth], depth fastest.
struct DecodedGrid {
  int width = 0;
  int height = 0;
  int depth = 0;
  std::vector<double> values;

  double at(int row, int col, int k) const noexcept {
    return values[(static_cast<std::size_t>(row) * width + col) * depth + k];
  }
};

// Basis vector b(z). Throws DomainError for z outside [-1, 1].
std::vector<double> basis_eval(double z, const BasisConfig& cfg);
void basis_eval(double z, const BasisConfig& cfg, std::span<double> out);

// Closed-form projection of an interval indicator onto the basis, normalized
// so that decode_ray reproduces the indicator: c_0 = len/2,
// c_cos,n = (sin(n pi b) - sin(n pi a)) / (n pi),
// c_sin,n = (cos(n pi a) - cos(n pi b)) / (n pi).
std::vector<double> intervals_to_coeffs(std::span<const Interval> intervals,
                                        const BasisConfig& cfg);
void intervals_to_coeffs(std::span<const Interval> intervals, const BasisConfig& cfg,
                         std::span<double> out);

// b(z)^T c. Not clamped: truncated series ring around interval ends.
double decode_ray(std::span<const double> coeffs, double z, const BasisConfig& cfg);

// Depth sample positions z_k = -1 + 2k / (depth_res - 1).
double depth_sample(int k, int depth_res) noexcept;

// decode_ray at every pixel and every depth sample; bit-identical to calling
// decode_ray directly, for any worker count.
DecodedGrid decode_grid(const FourierField& field, int depth_res);

// 2 c_0^2 + sum_n (c_cos,n^2 + c_sin,n^2); bounded by the occupied length.
double parseval_energy(std::span<const double> coeffs);

}  // namespace occfof
