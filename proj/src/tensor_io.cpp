#include "occfof/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include <boost/crc.hpp>
#include <fmt/format.h>
#include <png.h>

namespace occfof {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<decltype(u)>((u << 8) | p[i]);
  return static_cast<T>(u);
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

float get_f32(const std::uint8_t* p, bool little) {
  std::uint32_t u = 0;
  if (little) {
    u = get_le<std::uint32_t>(p);
  } else {
    for (int i = 0; i < 4; ++i) u = (u << 8) | p[i];
  }
  return std::bit_cast<float>(u);
}

// Cursor over a netpbm-style header: whitespace-separated ASCII tokens with
// '#' comments.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) ++pos_;
    if (start == pos_) throw ParseError("unexpected end of header", start);
    return std::string(bytes_.begin() + start, bytes_.begin() + pos_);
  }

  long integer(long lo, long hi, const char* what) {
    const std::size_t at = (skip_space(), pos_);
    const std::string t = token();
    long v = 0;
    std::size_t used = 0;
    try {
      v = std::stol(t, &used);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("invalid {} '{}'", what, t), at);
    }
    if (used != t.size() || v < lo || v > hi) {
      throw ParseError(fmt::format("invalid {} '{}'", what, t), at);
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from the raster.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw ParseError("missing whitespace after header", pos_);
    }
    ++pos_;
  }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr long kMaxSide = 1 << 20;

void require_payload(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t need) {
  if (bytes.size() - offset < need) {
    throw ParseError(fmt::format("raster truncated: need {} bytes, have {}", need,
                                 bytes.size() - offset),
                     bytes.size());
  }
  if (bytes.size() - offset > need) {
    throw ParseError("unexpected bytes after raster", offset + need);
  }
}

void check_image(const Image& image, std::initializer_list<int> channels) {
  if (image.width < 1 || image.height < 1) throw ShapeError("image must be non-empty");
  if (std::find(channels.begin(), channels.end(), image.channels) == channels.end()) {
    throw ShapeError(fmt::format("unsupported channel count {}", image.channels));
  }
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw ShapeError("image data size does not match its shape");
  }
}

std::uint16_t quantize16(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

std::uint8_t quantize8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

std::uint64_t crc64(std::span<const std::uint8_t> bytes) noexcept {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ull, ~0ull, ~0ull, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint64_t> dims,
                                        std::span<const float> data) {
  if (dims.size() > 255) throw ShapeError("too many tensor dimensions");
  std::uint64_t count = 1;
  for (std::uint64_t d : dims) {
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) {
      throw ShapeError("tensor dimensions overflow");
    }
    count *= d;
  }
  if (count != data.size()) throw ShapeError("tensor dimensions do not match data length");

  std::vector<std::uint8_t> out{'O', 'A', 'H', 'T'};
  out.reserve(4 + 2 + 2 + 8 * dims.size() + 4 * data.size() + 8);
  put_le(out, kTensorVersion);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<std::uint8_t>(dims.size()));
  for (std::uint64_t d : dims) put_le(out, d);
  const std::size_t payload_start = out.size();
  for (float v : data) put_f32(out, v);
  const std::uint64_t crc =
      crc64(std::span<const std::uint8_t>(out).subspan(payload_start, 4 * data.size()));
  put_le(out, crc);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw TensorError(TensorErrorCode::Truncated, "tensor header truncated");
  if (std::memcmp(bytes.data(), "OAHT", 4) != 0) {
    throw TensorError(TensorErrorCode::BadMagic, "not an OAHT tensor file");
  }
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  if (version != kTensorVersion) {
    throw TensorError(TensorErrorCode::BadVersion,
                      fmt::format("unsupported tensor version {}", version));
  }
  if (bytes[6] != kDtypeF32) {
    throw TensorError(TensorErrorCode::BadDtype, fmt::format("unsupported dtype code {}", bytes[6]));
  }
  const std::size_t ndim = bytes[7];
  std::size_t pos = 8;
  if (bytes.size() < pos + 8 * ndim) {
    throw TensorError(TensorErrorCode::Truncated, "tensor dimensions truncated");
  }
  Tensor t;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i, pos += 8) {
    const auto d = get_le<std::uint64_t>(bytes.data() + pos);
    if (d != 0 && count > (std::numeric_limits<std::uint64_t>::max() / 4) / d) {
      throw TensorError(TensorErrorCode::BadShape, "tensor dimensions overflow");
    }
    count *= d;
    t.dims.push_back(d);
  }
  const std::uint64_t payload = 4 * count;
  if (bytes.size() - pos < payload + 8) {
    throw TensorError(TensorErrorCode::Truncated,
                      fmt::format("tensor payload truncated: need {} bytes plus checksum, have {}",
                                  payload, bytes.size() - pos));
  }
  if (bytes.size() - pos > payload + 8) {
    throw TensorError(TensorErrorCode::TrailingBytes, "unexpected bytes after tensor checksum");
  }
  const auto stored = get_le<std::uint64_t>(bytes.data() + pos + payload);
  if (crc64(bytes.subspan(pos, payload)) != stored) {
    throw TensorError(TensorErrorCode::CrcMismatch, "tensor payload checksum mismatch");
  }
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) t.data[i] = get_f32(bytes.data() + pos + 4 * i, true);
  return t;
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> data) {
  write_file(path, encode_tensor(dims, data));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

std::filesystem::path frame_sidecar(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out += ".frame";
  return out;
}

void save_field(const std::filesystem::path& path, const FourierField& field,
                const std::optional<OrthoFrame>& frame) {
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(field.height()),
                                 static_cast<std::uint64_t>(field.width()),
                                 static_cast<std::uint64_t>(field.channels())};
  std::vector<float> values(field.data().begin(), field.data().end());
  write_tensor(path, dims, values);
  const auto sidecar = frame_sidecar(path);
  if (frame) {
    const std::string text = format_frame(*frame);
    write_file(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  } else {
    std::error_code ec;
    std::filesystem::remove(sidecar, ec);
  }
}

StoredField load_field(const std::filesystem::path& path) {
  const Tensor t = read_tensor(path);
  if (t.dims.size() != 3 || t.dims[0] == 0 || t.dims[1] == 0 || t.dims[2] == 0 ||
      t.dims[0] > static_cast<std::uint64_t>(kMaxSide) ||
      t.dims[1] > static_cast<std::uint64_t>(kMaxSide) || t.dims[2] > 4096) {
    throw TensorError(TensorErrorCode::BadShape, "field tensors must be [height, width, channels]");
  }
  StoredField out;
  out.field = FourierField(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]),
                           static_cast<int>(t.dims[2]));
  std::copy(t.data.begin(), t.data.end(), out.field.data().begin());
  const auto sidecar = frame_sidecar(path);
  if (std::filesystem::exists(sidecar)) {
    const auto bytes = read_file(sidecar);
    out.frame = parse_frame(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return out;
}

std::vector<std::uint8_t> encode_pfm(const Image& image) {
  check_image(image, {1, 3});
  const std::string header =
      fmt::format("{}\n{} {}\n-1.0\n", image.channels == 3 ? "PF" : "Pf", image.width, image.height);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + 4 * image.data.size());
  for (int r = image.height - 1; r >= 0; --r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < image.channels; ++ch) {
        put_f32(out, static_cast<float>(image.at(r, c, ch)));
      }
    }
  }
  return out;
}

Image decode_pfm(std::span<const std::uint8_t> bytes) {
  HeaderReader h(bytes);
  const std::string magic = h.token();
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    throw ParseError("not a PFM file", 0);
  }
  const int w = static_cast<int>(h.integer(1, kMaxSide, "width"));
  const int ht = static_cast<int>(h.integer(1, kMaxSide, "height"));
  const std::size_t scale_at = h.offset();
  const std::string scale_text = h.token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_text, &used);
    if (used != scale_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError("invalid PFM scale '" + scale_text + "'", scale_at);
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw ParseError("invalid PFM scale", scale_at);
  h.end_of_header();
  const std::size_t start = h.offset();
  require_payload(bytes, start, static_cast<std::size_t>(w) * ht * channels * 4);
  const bool little = scale < 0.0;
  Image img(w, ht, channels);
  const std::uint8_t* p = bytes.data() + start;
  for (int r = ht - 1; r >= 0; --r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch, p += 4) img.at(r, c, ch) = get_f32(p, little);
    }
  }
  return img;
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_pfm(image));
}

Image read_pfm(const std::filesystem::path& path) { return decode_pfm(read_file(path)); }

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  check_image(image, {3});
  const std::string header = fmt::format("P6\n{} {}\n255\n", image.width, image.height);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : image.data) out.push_back(quantize8(v));
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  HeaderReader h(bytes);
  if (h.token() != "P6") throw ParseError("not a binary PPM file", 0);
  const int w = static_cast<int>(h.integer(1, kMaxSide, "width"));
  const int ht = static_cast<int>(h.integer(1, kMaxSide, "height"));
  const std::size_t max_at = h.offset();
  const long maxval = h.integer(1, 65535, "maxval");
  if (maxval != 255) throw ParseError("only 8-bit PPM is supported", max_at);
  h.end_of_header();
  const std::size_t start = h.offset();
  require_payload(bytes, start, static_cast<std::size_t>(w) * ht * 3);
  Image img(w, ht, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = bytes[start + i] / 255.0;
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_ppm(image));
}

Image read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

std::vector<std::uint8_t> encode_pgm(const Mask& mask) {
  if (mask.width < 1 || mask.height < 1) throw ShapeError("mask must be non-empty");
  const std::string header = fmt::format("P5\n{} {}\n255\n", mask.width, mask.height);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::uint8_t v : mask.data) out.push_back(v ? 255 : 0);
  return out;
}

Mask decode_pgm(std::span<const std::uint8_t> bytes) {
  HeaderReader h(bytes);
  if (h.token() != "P5") throw ParseError("not a binary PGM file", 0);
  const int w = static_cast<int>(h.integer(1, kMaxSide, "width"));
  const int ht = static_cast<int>(h.integer(1, kMaxSide, "height"));
  const std::size_t max_at = h.offset();
  const long maxval = h.integer(1, 65535, "maxval");
  if (maxval != 255) throw ParseError("mask PGM must have maxval 255", max_at);
  h.end_of_header();
  const std::size_t start = h.offset();
  require_payload(bytes, start, static_cast<std::size_t>(w) * ht);
  Mask m(w, ht);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const std::uint8_t v = bytes[start + i];
    if (v != 0 && v != 255) {
      throw ParseError(fmt::format("mask value {} is neither 0 nor 255", v), start + i);
    }
    m.data[i] = v ? 1 : 0;
  }
  return m;
}

void write_pgm(const std::filesystem::path& path, const Mask& mask) {
  write_file(path, encode_pgm(mask));
}

Mask read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

namespace {

struct PngFile {
  FILE* fp = nullptr;
  ~PngFile() {
    if (fp) std::fclose(fp);
  }
};

[[noreturn]] void png_error_handler(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = message;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace

void write_png16(const std::filesystem::path& path, const Image& image) {
  check_image(image, {1, 3});
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels * 2;
  std::vector<std::uint8_t> raster(stride * image.height);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const std::uint16_t q = quantize16(image.data[i]);
    raster[2 * i] = static_cast<std::uint8_t>(q >> 8);
    raster[2 * i + 1] = static_cast<std::uint8_t>(q & 0xFF);
  }
  std::vector<png_bytep> rows(image.height);
  for (int r = 0; r < image.height; ++r) rows[r] = raster.data() + stride * r;

  PngFile file;
  file.fp = std::fopen(path.c_str(), "wb");
  if (!file.fp) throw IoError("cannot create " + path.string());
  std::string message;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed for " + path.string() + ": " + message);
  }
  png_init_io(png, file.fp);
  png_set_IHDR(png, info, image.width, image.height, 16,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png16(const std::filesystem::path& path) {
  PngFile file;
  file.fp = std::fopen(path.c_str(), "rb");
  if (!file.fp) throw IoError("cannot open " + path.string());
  std::uint8_t sig[8] = {};
  if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ParseError("not a PNG file: " + path.string(), 0);
  }
  std::string message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  // Locals modified after setjmp must not be relied on in the error path.
  Image img;
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("PNG read failed for " + path.string() + ": " + message, 0);
  }
  png_init_io(png, file.fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth != 16 || (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_GRAY) ||
      png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("expected a non-interlaced 16-bit gray or RGB PNG: " + path.string(), 0);
  }
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int channels = color == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(w) * channels * 2;
  raster.resize(stride * h);
  rows.resize(h);
  for (int r = 0; r < h; ++r) rows[r] = raster.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  img = Image(w, h, channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const unsigned q = (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1];
    img.data[i] = q / 65535.0;
  }
  return img;
}

void write_normal_pfm(const std::filesystem::path& path, const NormalMap& map) {
  Image img(map.width, map.height, 3);
  for (std::size_t p = 0; p < map.normals.size(); ++p) {
    for (int ch = 0; ch < 3; ++ch) img.data[p * 3 + ch] = map.mask.data[p] ? map.normals[p][ch] : 0.0;
  }
  write_pfm(path, img);
}

NormalMap read_normal_pfm(const std::filesystem::path& path) {
  const Image img = read_pfm(path);
  if (img.channels != 3) throw ParseError("normal maps need three channels", 0);
  NormalMap map(img.width, img.height);
  for (std::size_t p = 0; p < map.normals.size(); ++p) {
    const Vec3 n(img.data[p * 3], img.data[p * 3 + 1], img.data[p * 3 + 2]);
    map.normals[p] = n;
    map.mask.data[p] = n.squaredNorm() > 0.0 ? 1 : 0;
  }
  return map;
}

}  // namespace occfof
