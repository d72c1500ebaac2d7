#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace occfof {

/// Binary per-pixel mask, row-major; values are 0 or 1.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * width + col];
  }
  std::size_t count() const;
  bool same_size(int w, int h) const noexcept { return width == w && height == h; }

  friend bool operator==(const Mask&, const Mask&) = default;
};

/// Single-channel real-valued map, row-major.
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

/// Interleaved multi-channel image with values nominally in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  bool same_shape(const Image& o) const noexcept {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

}  // namespace occfof
