#include "occfof/fof.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "occfof/errors.hpp"
#include "occfof/parallel.hpp"

namespace occfof {

namespace {

constexpr double kPi = std::numbers::pi;

void check_length(std::span<const double> coeffs, const BasisConfig& cfg) {
  if (coeffs.size() != static_cast<std::size_t>(cfg.channels())) {
    throw ShapeError("coefficient vector has " + std::to_string(coeffs.size()) +
                     " entries, basis expects " + std::to_string(cfg.channels()));
  }
}

}  // namespace

void validate(const BasisConfig& cfg) {
  if (cfg.order < 0) throw DomainError("basis order must be non-negative");
}

void validate(std::span<const Interval> intervals) {
  double previous_end = -1.0;
  bool first = true;
  for (const auto& iv : intervals) {
    if (!(iv.z_in >= -1.0 && iv.z_out <= 1.0 && iv.z_in < iv.z_out)) {
      throw DomainError("interval (" + std::to_string(iv.z_in) + ", " +
                        std::to_string(iv.z_out) + ") is not inside [-1, 1] or is empty");
    }
    if (!first && iv.z_in < previous_end) {
      throw DomainError("intervals overlap or are not sorted");
    }
    previous_end = iv.z_out;
    first = false;
  }
}

double occupied_length(std::span<const Interval> intervals) noexcept {
  double total = 0.0;
  for (const auto& iv : intervals) total += iv.length();
  return total;
}

FourierField::FourierField(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 1) {
    throw ShapeError("invalid FourierField dimensions");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

void basis_eval(double z, const BasisConfig& cfg, std::span<double> out) {
  validate(cfg);
  if (!(z >= -1.0 && z <= 1.0)) {
    throw DomainError("basis depth " + std::to_string(z) + " outside [-1, 1]");
  }
  check_length(out, cfg);
  out[0] = 1.0;
  for (int n = 1; n <= cfg.order; ++n) {
    const double phase = n * kPi * z;
    out[2 * n - 1] = std::cos(phase);
    out[2 * n] = std::sin(phase);
  }
}

std::vector<double> basis_eval(double z, const BasisConfig& cfg) {
  validate(cfg);
  std::vector<double> out(cfg.channels());
  basis_eval(z, cfg, out);
  return out;
}

void intervals_to_coeffs(std::span<const Interval> intervals, const BasisConfig& cfg,
                         std::span<double> out) {
  validate(cfg);
  validate(intervals);
  check_length(out, cfg);
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& iv : intervals) {
    const double a = iv.z_in;
    const double b = iv.z_out;
    out[0] += 0.5 * (b - a);
    for (int n = 1; n <= cfg.order; ++n) {
      const double w = n * kPi;
      out[2 * n - 1] += (std::sin(w * b) - std::sin(w * a)) / w;
      out[2 * n] += (std::cos(w * a) - std::cos(w * b)) / w;
    }
  }
}

std::vector<double> intervals_to_coeffs(std::span<const Interval> intervals,
                                        const BasisConfig& cfg) {
  validate(cfg);
  std::vector<double> out(cfg.channels());
  intervals_to_coeffs(intervals, cfg, out);
  return out;
}

namespace {

// Shared by decode_ray and decode_grid so both produce identical bits.
double dot_basis(std::span<const double> coeffs, std::span<const double> basis) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * basis[i];
  return acc;
}

}  // namespace

double decode_ray(std::span<const double> coeffs, double z, const BasisConfig& cfg) {
  check_length(coeffs, cfg);
  std::vector<double> basis(cfg.channels());
  basis_eval(z, cfg, basis);
  return dot_basis(coeffs, basis);
}

double depth_sample(int k, int depth_res) noexcept {
  return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(depth_res - 1);
}

DecodedGrid decode_grid(const FourierField& field, int depth_res) {
  if (depth_res < 2) throw DomainError("decode_grid needs depth_res >= 2");
  if (field.channels() % 2 != 1) throw ShapeError("field channel count must be odd");
  const BasisConfig cfg{(field.channels() - 1) / 2};
  const std::size_t k_channels = static_cast<std::size_t>(cfg.channels());

  std::vector<double> table(static_cast<std::size_t>(depth_res) * k_channels);
  for (int k = 0; k < depth_res; ++k) {
    basis_eval(depth_sample(k, depth_res), cfg,
               std::span<double>(table.data() + k * k_channels, k_channels));
  }

  DecodedGrid grid;
  grid.width = field.width();
  grid.height = field.height();
  grid.depth = depth_res;
  grid.values.resize(field.pixel_count() * static_cast<std::size_t>(depth_res));

  const int width = field.width();
  parallel_for(field.pixel_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const int row = static_cast<int>(p / width);
      const int col = static_cast<int>(p % width);
      const auto coeffs = field.pixel(row, col);
      double* out = grid.values.data() + p * depth_res;
      for (int k = 0; k < depth_res; ++k) {
        out[k] = dot_basis(coeffs, std::span<const double>(table.data() + k * k_channels,
                                                           k_channels));
      }
    }
  });
  return grid;
}

double parseval_energy(std::span<const double> coeffs) {
  if (coeffs.empty() || coeffs.size() % 2 != 1) {
    throw ShapeError("coefficient vector length must be odd");
  }
  double energy = 2.0 * coeffs[0] * coeffs[0];
  for (std::size_t i = 1; i < coeffs.size(); ++i) energy += coeffs[i] * coeffs[i];
  return energy;
}

}  // namespace occfof
