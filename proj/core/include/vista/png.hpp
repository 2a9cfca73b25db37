#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vista::png {

/// 8-bit raster: channels is 1 (grayscale) or 3 (RGB), rows top to bottom.
struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;
};

/// Encodes an 8-bit grayscale or RGB PNG (filter type 0, zlib level 9).
std::vector<std::uint8_t> encode(std::uint32_t width, std::uint32_t height, int channels,
                                 std::span<const std::uint8_t> pixels);

/// Decodes non-interlaced 8-bit grayscale/RGB PNGs with any standard row filter.
/// Throws Error(CorruptFile) on malformed input.
Raster decode(std::span<const std::uint8_t> bytes);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace vista::png
