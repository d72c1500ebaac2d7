#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "occfof/encode.hpp"
#include "occfof/oracles.hpp"
#include "occfof/render.hpp"
#include "occfof/rng.hpp"
#include "occfof/shapes.hpp"
#include "occfof/tensor_io.hpp"

using namespace occfof;
using namespace occfof::shapes;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("occfof_io_" + name);
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

TensorErrorCode decode_code(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_tensor(bytes);
  } catch (const TensorError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode_tensor accepted corrupt bytes";
  return TensorErrorCode::BadMagic;
}

}  // namespace

TEST(Crc64, CheckValue) {
  EXPECT_EQ(crc64(bytes_of("123456789")), 0x995DC9BBDF1939FAull);
  EXPECT_EQ(crc64(std::vector<std::uint8_t>{}), 0u);
}

TEST(Tensor, SmallZeroTensorLayout) {
  const std::uint64_t dims[] = {2, 3};
  const std::vector<float> zeros(6, 0.0f);
  const auto bytes = encode_tensor(dims, zeros);
  ASSERT_EQ(bytes.size(), 4u + 2 + 1 + 1 + 16 + 24 + 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "OAHT");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], kDtypeF32);
  EXPECT_EQ(bytes[7], 2);

  const auto path = temp_path("zeros.oaht");
  write_tensor(path, dims, zeros);
  EXPECT_EQ(read_file(path), bytes);
  const Tensor t = read_tensor(path);
  EXPECT_EQ(t.dims, (std::vector<std::uint64_t>{2, 3}));
  EXPECT_EQ(t.data, zeros);
  std::filesystem::remove(path);
}

TEST(Tensor, DistinctErrorCodes) {
  const std::uint64_t dims[] = {2, 2};
  const std::vector<float> data{1.0f, -2.0f, 3.5f, 0.25f};
  const auto good = encode_tensor(dims, data);

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_code(magic), TensorErrorCode::BadMagic);

  auto version = good;
  version[4] = 2;
  EXPECT_EQ(decode_code(version), TensorErrorCode::BadVersion);

  auto dtype = good;
  dtype[6] = 7;
  EXPECT_EQ(decode_code(dtype), TensorErrorCode::BadDtype);

  auto payload = good;
  payload[8 + 16 + 5] ^= 0x01;
  EXPECT_EQ(decode_code(payload), TensorErrorCode::CrcMismatch);

  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  EXPECT_EQ(decode_code(truncated), TensorErrorCode::Truncated);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_code(trailing), TensorErrorCode::TrailingBytes);

  EXPECT_THROW(encode_tensor(dims, std::vector<float>(3)), ShapeError);
}

TEST(Tensor, FlippedByteOnDiskIsRejected) {
  const std::uint64_t dims[] = {3};
  const std::vector<float> data{1.0f, 2.0f, 3.0f};
  const auto path = temp_path("flip.oaht");
  write_tensor(path, dims, data);
  auto bytes = read_file(path);
  bytes[8 + 8 + 2] ^= 0x80;
  write_file(path, bytes);
  try {
    read_tensor(path);
    FAIL() << "corrupt tensor accepted";
  } catch (const TensorError& e) {
    EXPECT_EQ(e.code(), TensorErrorCode::CrcMismatch);
  }
  std::filesystem::remove(path);
}

TEST(Field, RoundTripAtSinglePrecision) {
  OrthoFrame frame;
  const FourierField f = mesh_to_fof(icosphere(0.6, 4), frame, BasisConfig{15});
  ASSERT_EQ(f.channels(), 31);
  const auto path = temp_path("field.oaht");
  save_field(path, f, frame);
  const StoredField back = load_field(path);
  ASSERT_TRUE(back.frame.has_value());
  EXPECT_EQ(*back.frame, frame);
  ASSERT_EQ(back.field.width(), 128);
  ASSERT_EQ(back.field.height(), 128);
  ASSERT_EQ(back.field.channels(), 31);
  for (std::size_t i = 0; i < f.data().size(); ++i) {
    ASSERT_EQ(back.field.data()[i], static_cast<double>(static_cast<float>(f.data()[i])));
  }
  std::filesystem::remove(path);
  std::filesystem::remove(frame_sidecar(path));
}

TEST(Pfm, RoundTripsExactly) {
  Image small(2, 2, 3);
  const float values[] = {0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f, 0.7f, 0.8f, 0.9f, 1.0f, -1.0f, 3.25f};
  for (int i = 0; i < 12; ++i) small.data[i] = values[i];
  const Image back = decode_pfm(encode_pfm(small));
  EXPECT_EQ(back.width, 2);
  EXPECT_EQ(back.channels, 3);
  EXPECT_EQ(back.data, small.data);

  Image gray(3, 2, 1);
  gray.data = {0.0, 0.5, 1.0, 0.25, 0.75, 0.125};
  const auto path = temp_path("gray.pfm");
  write_pfm(path, gray);
  EXPECT_EQ(read_pfm(path).data, gray.data);
  std::filesystem::remove(path);

  const auto header = encode_pfm(small);
  EXPECT_EQ(std::string(header.begin(), header.begin() + 12), "PF\n2 2\n-1.0\n");
}

TEST(Pfm, BigEndianAndRowOrder) {
  std::string text = "Pf\n1 2\n1.0\n";
  // Rows bottom to top: first stored value belongs to the last row.
  const unsigned char bottom[] = {0x3F, 0x80, 0x00, 0x00};  // 1.0f
  const unsigned char top[] = {0x40, 0x00, 0x00, 0x00};     // 2.0f
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.insert(bytes.end(), bottom, bottom + 4);
  bytes.insert(bytes.end(), top, top + 4);
  const Image img = decode_pfm(bytes);
  EXPECT_EQ(img.at(0, 0, 0), 2.0);
  EXPECT_EQ(img.at(1, 0, 0), 1.0);
}

TEST(Pfm, MalformedHeaderReportsOffset) {
  try {
    decode_pfm(bytes_of("PF\n2 x\n-1.0\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), 5u);
  }
  EXPECT_THROW(decode_pfm(bytes_of("P7\n2 2\n-1.0\n")), ParseError);
  EXPECT_THROW(decode_pfm(bytes_of("PF\n2 2\n-1.0\n1234")), ParseError);
}

TEST(Ppm, RoundTripAtEightBits) {
  Image img(3, 2, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<double>(i * 13 % 256) / 255.0;
  const Image back = decode_ppm(encode_ppm(img));
  ASSERT_EQ(back.data.size(), img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_DOUBLE_EQ(back.data[i], img.data[i]);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n3 2\n65535\n")), ParseError);
}

TEST(Pgm, MaskRoundTripAndStrictValues) {
  Rng rng(3);
  Mask m(7, 5);
  for (auto& v : m.data) v = rng.below(2);
  const auto path = temp_path("mask.pgm");
  write_pgm(path, m);
  EXPECT_EQ(read_pgm(path), m);
  std::filesystem::remove(path);

  std::vector<std::uint8_t> bad = bytes_of("P5\n2 1\n255\n");
  bad.push_back(255);
  bad.push_back(7);
  EXPECT_THROW(decode_pgm(bad), ParseError);
}

TEST(Png16, NormalQuantizationBound) {
  OrthoFrame frame;
  frame.width = frame.height = 48;
  const NormalMap map = render_normals(icosphere(0.6, 3), frame, View::Front);
  const Image encoded = encode_normals(map);
  const auto path = temp_path("normals.png");
  write_png16(path, encoded);
  const Image back = read_png16(path);
  ASSERT_EQ(back.width, 48);
  ASSERT_EQ(back.channels, 3);
  double worst = 0.0;
  for (std::size_t i = 0; i < encoded.data.size(); ++i) {
    worst = std::max(worst, std::abs(back.data[i] - encoded.data[i]));
  }
  EXPECT_LE(worst, 2.0 / 65535.0);
  std::filesystem::remove(path);
}

TEST(NormalPfm, RoundTripAtSinglePrecision) {
  OrthoFrame frame;
  frame.width = frame.height = 20;
  const NormalMap map = render_normals(torus(), frame, View::Back);
  const auto path = temp_path("normals.pfm");
  write_normal_pfm(path, map);
  const NormalMap back = read_normal_pfm(path);
  EXPECT_EQ(back.mask, map.mask);
  for (std::size_t p = 0; p < map.normals.size(); ++p) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_EQ(back.normals[p][k], static_cast<double>(static_cast<float>(map.normals[p][k])));
    }
  }
  std::filesystem::remove(path);
}
