#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vista {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kSalt{255, 255, 255};
inline constexpr Rgb kPepper{0, 0, 0};
// Chart colors avoid pure white and pure black so every injected impulse is
// distinguishable from the clean render.
inline constexpr Rgb kBackground{250, 250, 250};
inline constexpr Rgb kFrame{150, 150, 150};
inline constexpr Rgb kLine{20, 40, 110};

inline constexpr std::uint32_t kMinChartSide = 64;
inline constexpr std::uint32_t kDefaultChartWidth = 800;
inline constexpr std::uint32_t kDefaultChartHeight = 400;

struct ChartMeta {
  std::string segment_id;
  std::optional<double> noise;
};

/// Row-major RGB raster, width/height >= 64.
struct ChartImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;
  ChartMeta meta;

  Rgb at(std::uint32_t x, std::uint32_t y) const {
    const auto i = (std::size_t{y} * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

struct NoiseSpec {
  double density = 0.0;     ///< fraction of all pixels corrupted, in [0, 0.5]
  double salt_ratio = 0.2;  ///< fraction of corrupted pixels set white
  std::uint64_t seed = 42;
};

/// Noise densities swept in the chart-corruption ablation.
inline constexpr std::array<double, 11> kAblationDensities{
    0.010, 0.015, 0.020, 0.025, 0.030, 0.040, 0.045, 0.055, 0.060, 0.065, 0.070};

/// Label-free line chart of values in [0,1]: 10% margins, grey axis frame,
/// 2 px polyline, y axis fixed to [0,1] increasing upward.
ChartImage render_line_chart(std::span<const double> values,
                             std::uint32_t width = kDefaultChartWidth,
                             std::uint32_t height = kDefaultChartHeight);

/// Returns a copy with exactly round(density*W*H) distinct pixels replaced:
/// round(salt_ratio*n) white, the rest black. Positions come from a partial
/// Fisher-Yates shuffle driven by mt19937_64(seed), so a higher density at the
/// same seed corrupts a superset of pixels.
ChartImage inject_salt_pepper(const ChartImage& img, const NoiseSpec& spec);

std::vector<std::uint8_t> encode_png(const ChartImage& img);
ChartImage decode_png(std::span<const std::uint8_t> bytes);

/// `<ticker>_<start>[_noise<coeff>].png` with the coefficient at 3 decimals.
std::string chart_filename(const std::string& ticker, std::size_t start_index,
                           std::optional<double> noise);

}  // namespace vista
