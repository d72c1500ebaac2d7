#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "occfof/encode.hpp"
#include "occfof/errors.hpp"
#include "occfof/fof.hpp"
#include "occfof/image.hpp"
#include "occfof/render.hpp"

namespace occfof {

/// OAHT tensor container, all integers little-endian:
///   "OAHT" | u16 version = 1 | u8 dtype (1 = f32) | u8 ndim |
///   ndim x u64 dims | row-major f32 payload | u64 CRC-64 of the payload.
/// The checksum is CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones
/// init and final xor).
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;

enum class TensorErrorCode { BadMagic, BadVersion, BadDtype, BadShape, Truncated, CrcMismatch, TrailingBytes };

class TensorError : public IoError {
 public:
  TensorError(TensorErrorCode code, const std::string& what) : IoError(what), code_(code) {}
  TensorErrorCode code() const noexcept { return code_; }

 private:
  TensorErrorCode code_;
};

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> data;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::uint64_t crc64(std::span<const std::uint8_t> bytes) noexcept;

// Throws ShapeError when the dims product does not match data.size().
std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims,
                                        std::span<const float> data);
// Throws TensorError with a code naming the first problem found.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> data);
Tensor read_tensor(const std::filesystem::path& path);

/// Fields are stored as [height, width, channels] f32 tensors. The frame,
/// when given, goes to a plain-text sidecar `<path>.frame`.
void save_field(const std::filesystem::path& path, const FourierField& field,
                const std::optional<OrthoFrame>& frame = std::nullopt);

struct StoredField {
  FourierField field;
  std::optional<OrthoFrame> frame;
};

StoredField load_field(const std::filesystem::path& path);

std::filesystem::path frame_sidecar(const std::filesystem::path& path);

// Portable float map: "PF" (3 channels) or "Pf" (1 channel), rows stored
// bottom to top. Writes little-endian (scale -1.0); reads either byte order.
void write_pfm(const std::filesystem::path& path, const Image& image);
Image read_pfm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pfm(const Image& image);
Image decode_pfm(std::span<const std::uint8_t> bytes);

// Binary 8-bit RGB (P6). Values are rounded to v * 255.
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(std::span<const std::uint8_t> bytes);

// Binary 8-bit mask (P5) with 0 and 255 only.
void write_pgm(const std::filesystem::path& path, const Mask& mask);
Mask read_pgm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const Mask& mask);
Mask decode_pgm(std::span<const std::uint8_t> bytes);

// 16-bit grayscale or RGB PNG; values are rounded to v * 65535.
void write_png16(const std::filesystem::path& path, const Image& image);
Image read_png16(const std::filesystem::path& path);

// Normal maps as raw 3-channel PFM (components in [-1, 1], zero on
// background); the mask is recovered from non-zero pixels.
void write_normal_pfm(const std::filesystem::path& path, const NormalMap& map);
NormalMap read_normal_pfm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace occfof
