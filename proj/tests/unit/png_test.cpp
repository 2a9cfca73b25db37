#include <gtest/gtest.h>

#include <zlib.h>

#include <random>

#include "vista/error.hpp"
#include "vista/png.hpp"

using namespace vista;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::vector<std::uint8_t> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  put_u32(out, static_cast<std::uint32_t>(crc32(0, body.data(), static_cast<uInt>(body.size()))));
}

std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

// Independent encoder that cycles through all five row filters.
std::vector<std::uint8_t> encode_with_filters(std::uint32_t w, std::uint32_t h, int ch,
                                              const std::vector<std::uint8_t>& px) {
  const std::size_t stride = std::size_t{w} * static_cast<std::size_t>(ch);
  std::vector<std::uint8_t> raw;
  for (std::uint32_t y = 0; y < h; ++y) {
    const int filter = static_cast<int>(y % 5);
    raw.push_back(static_cast<std::uint8_t>(filter));
    for (std::size_t i = 0; i < stride; ++i) {
      const int x = px[y * stride + i];
      const int a = i >= static_cast<std::size_t>(ch) ? px[y * stride + i - static_cast<std::size_t>(ch)] : 0;
      const int b = y > 0 ? px[(y - 1) * stride + i] : 0;
      const int c = (y > 0 && i >= static_cast<std::size_t>(ch)) ? px[(y - 1) * stride + i - static_cast<std::size_t>(ch)] : 0;
      int pred = 0;
      switch (filter) {
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: pred = paeth(a, b, c); break;
        default: break;
      }
      raw.push_back(static_cast<std::uint8_t>(x - pred));
    }
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(len);
  compress(z.data(), &len, raw.data(), static_cast<uLong>(raw.size()));
  z.resize(len);

  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, w);
  put_u32(ihdr, h);
  ihdr.insert(ihdr.end(), {8, static_cast<std::uint8_t>(ch == 3 ? 2 : 0), 0, 0, 0});
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});
  return out;
}

std::vector<std::uint8_t> random_pixels(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> px(n);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng());
  return px;
}

}  // namespace

TEST(Png, RoundTripRgbAndGray) {
  for (int ch : {1, 3}) {
    const auto px = random_pixels(std::size_t{37} * 23 * static_cast<std::size_t>(ch), 5);
    const auto bytes = png::encode(37, 23, ch, px);
    const auto r = png::decode(bytes);
    EXPECT_EQ(r.width, 37u);
    EXPECT_EQ(r.height, 23u);
    EXPECT_EQ(r.channels, ch);
    EXPECT_EQ(r.pixels, px);
  }
}

TEST(Png, SignatureAndChunkLayout) {
  const std::vector<std::uint8_t> px(64 * 64 * 3, 255);
  const auto bytes = png::encode(64, 64, 3, px);
  ASSERT_GT(bytes.size(), 33u);
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 8),
            (std::vector<std::uint8_t>{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'}));
  EXPECT_EQ(std::string(bytes.begin() + 12, bytes.begin() + 16), "IHDR");
  EXPECT_EQ(std::string(bytes.end() - 8, bytes.end() - 4), "IEND");
}

TEST(Png, DecodesEveryRowFilter) {
  for (int ch : {1, 3}) {
    const auto px = random_pixels(std::size_t{19} * 11 * static_cast<std::size_t>(ch), 9);
    const auto r = png::decode(encode_with_filters(19, 11, ch, px));
    EXPECT_EQ(r.pixels, px);
  }
}

TEST(Png, RejectsCorruptInput) {
  const std::vector<std::uint8_t> px(64 * 64 * 3, 10);
  auto bytes = png::encode(64, 64, 3, px);
  auto bad_crc = bytes;
  bad_crc[20] ^= 0xff;
  auto truncated = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 40);
  const std::vector<std::uint8_t> garbage{1, 2, 3};
  for (const auto& b : {bad_crc, truncated, garbage}) {
    try {
      png::decode(b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::CorruptFile);
    }
  }
}
