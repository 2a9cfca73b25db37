#include "vista/png.hpp"

#include <zlib.h>

#include <array>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "vista/error.hpp"

namespace vista::png {
namespace {

constexpr std::array<std::uint8_t, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5],
               std::span<const std::uint8_t> data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const auto type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

[[noreturn]] void corrupt(const std::string& why) { throw Error(Errc::CorruptFile, "PNG: " + why); }

std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

}  // namespace

std::vector<std::uint8_t> encode(std::uint32_t width, std::uint32_t height, int channels,
                                 std::span<const std::uint8_t> pixels) {
  if (channels != 1 && channels != 3) throw Error(Errc::InvalidArgument, "channels must be 1 or 3");
  const std::size_t stride = std::size_t{width} * static_cast<std::size_t>(channels);
  if (pixels.size() != stride * height) throw Error(Errc::BadDimensions, "pixel buffer size mismatch");

  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * height);
  for (std::uint32_t y = 0; y < height; ++y) {
    raw.push_back(0);
    const auto row = pixels.subspan(y * stride, stride);
    raw.insert(raw.end(), row.begin(), row.end());
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw Error(Errc::IoError, "zlib compression failed");
  packed.resize(packed_size);

  std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, width);
  put_u32(ihdr, height);
  ihdr.push_back(8);                         // bit depth
  ihdr.push_back(channels == 3 ? 2 : 0);     // color type
  ihdr.insert(ihdr.end(), {0, 0, 0});        // compression, filter, interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

Raster decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSignature.size() ||
      !std::equal(kSignature.begin(), kSignature.end(), bytes.begin()))
    corrupt("bad signature");

  Raster img;
  std::vector<std::uint8_t> idat;
  bool have_header = false;
  std::size_t at = kSignature.size();
  while (true) {
    if (at + 12 > bytes.size()) corrupt("truncated chunk");
    const auto len = get_u32(bytes, at);
    if (len > bytes.size() - at - 12) corrupt("chunk length out of range");
    const auto type = std::string(bytes.begin() + at + 4, bytes.begin() + at + 8);
    const auto data = bytes.subspan(at + 8, len);
    const auto crc = crc32(0L, bytes.data() + at + 4, static_cast<uInt>(len + 4));
    if (crc != get_u32(bytes, at + 8 + len)) corrupt("CRC mismatch in " + type);
    at += 12 + std::size_t{len};

    if (type == "IHDR") {
      if (len != 13) corrupt("bad IHDR");
      img.width = get_u32(data, 0);
      img.height = get_u32(data, 4);
      if (data[8] != 8 || data[10] != 0 || data[11] != 0 || data[12] != 0)
        corrupt("only 8-bit non-interlaced images are supported");
      if (data[9] == 0) img.channels = 1;
      else if (data[9] == 2) img.channels = 3;
      else corrupt("unsupported color type");
      have_header = true;
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data.begin(), data.end());
    } else if (type == "IEND") {
      break;
    }
  }
  if (!have_header) corrupt("missing IHDR");

  const std::size_t stride = std::size_t{img.width} * static_cast<std::size_t>(img.channels);
  std::vector<std::uint8_t> raw((stride + 1) * img.height);
  uLongf raw_size = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != raw.size())
    corrupt("bad image data");

  const auto bpp = static_cast<std::size_t>(img.channels);
  img.pixels.assign(stride * img.height, 0);
  for (std::size_t y = 0; y < img.height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* cur = &img.pixels[y * stride];
    const std::uint8_t* prev = y > 0 ? &img.pixels[(y - 1) * stride] : nullptr;
    for (std::size_t x = 0; x < stride; ++x) {
      const int a = x >= bpp ? cur[x - bpp] : 0;
      const int b = prev ? prev[x] : 0;
      const int c = (prev && x >= bpp) ? prev[x - bpp] : 0;
      int pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: pred = paeth(a, b, c); break;
        default: corrupt("unknown filter type");
      }
      cur[x] = static_cast<std::uint8_t>(src[x] + pred);
    }
  }
  return img;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "failed to write " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace vista::png
