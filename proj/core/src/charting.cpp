#include "vista/charting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "vista/error.hpp"
#include "vista/png.hpp"

namespace vista {
namespace {

struct Canvas {
  std::uint32_t width;
  std::uint32_t height;
  std::vector<std::uint8_t>& px;

  void set(long x, long y, Rgb c) {
    if (x < 0 || y < 0 || x >= static_cast<long>(width) || y >= static_cast<long>(height)) return;
    const auto i = (static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)) * 3;
    px[i] = c[0];
    px[i + 1] = c[1];
    px[i + 2] = c[2];
  }
};

// Unbiased draw in [0, bound) from a 64-bit engine.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

ChartImage render_line_chart(std::span<const double> values, std::uint32_t width,
                             std::uint32_t height) {
  if (values.size() < 2) throw Error(Errc::TooShort, "chart needs at least 2 values");
  if (width < kMinChartSide || height < kMinChartSide)
    throw Error(Errc::BadDimensions, "chart sides must be >= 64 px");

  ChartImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(std::size_t{width} * height * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = kBackground[0];
    img.pixels[i + 1] = kBackground[1];
    img.pixels[i + 2] = kBackground[2];
  }
  Canvas canvas{width, height, img.pixels};

  const long left = std::lround(0.1 * width);
  const long right = static_cast<long>(width) - 1 - left;
  const long top = std::lround(0.1 * height);
  const long bottom = static_cast<long>(height) - 1 - top;

  for (long x = left; x <= right; ++x) {
    canvas.set(x, top, kFrame);
    canvas.set(x, bottom, kFrame);
  }
  for (long y = top; y <= bottom; ++y) {
    canvas.set(left, y, kFrame);
    canvas.set(right, y, kFrame);
  }

  const double x_step = static_cast<double>(right - left) / static_cast<double>(values.size() - 1);
  const double y_span = static_cast<double>(bottom - top);
  const auto point = [&](std::size_t i) {
    const double v = std::clamp(values[i], 0.0, 1.0);
    return std::pair{static_cast<double>(left) + x_step * static_cast<double>(i),
                     static_cast<double>(bottom) - v * y_span};
  };
  const auto stamp = [&](double x, double y) {
    const long px = std::lround(x);
    const long py = std::lround(y);
    for (long dy = 0; dy < 2; ++dy)
      for (long dx = 0; dx < 2; ++dx) canvas.set(px + dx, py + dy, kLine);
  };

  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const auto [x0, y0] = point(i);
    const auto [x1, y1] = point(i + 1);
    const double len = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
    const auto steps = static_cast<long>(std::ceil(2.0 * len)) + 1;
    for (long s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(steps);
      stamp(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
    }
  }
  return img;
}

ChartImage inject_salt_pepper(const ChartImage& img, const NoiseSpec& spec) {
  if (!(spec.density >= 0.0 && spec.density <= 0.5))
    throw Error(Errc::InvalidArgument, "noise density must lie in [0, 0.5]");
  if (!(spec.salt_ratio >= 0.0 && spec.salt_ratio <= 1.0))
    throw Error(Errc::InvalidArgument, "salt ratio must lie in [0, 1]");

  ChartImage out = img;
  out.meta.noise = spec.density;
  const std::uint64_t total = std::uint64_t{img.width} * img.height;
  const auto n_noisy = static_cast<std::uint64_t>(std::llround(spec.density * static_cast<double>(total)));
  const auto n_salt = static_cast<std::uint64_t>(std::llround(spec.salt_ratio * static_cast<double>(n_noisy)));
  if (n_noisy == 0) return out;

  std::vector<std::uint32_t> positions(total);
  std::iota(positions.begin(), positions.end(), 0u);
  std::mt19937_64 rng(spec.seed);
  for (std::uint64_t i = 0; i < n_noisy; ++i) {
    const auto j = i + uniform_below(rng, total - i);
    std::swap(positions[i], positions[j]);
    const Rgb color = i < n_salt ? kSalt : kPepper;
    const auto at = std::size_t{positions[i]} * 3;
    out.pixels[at] = color[0];
    out.pixels[at + 1] = color[1];
    out.pixels[at + 2] = color[2];
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const ChartImage& img) {
  return png::encode(img.width, img.height, 3, img.pixels);
}

ChartImage decode_png(std::span<const std::uint8_t> bytes) {
  auto raster = png::decode(bytes);
  ChartImage img;
  img.width = raster.width;
  img.height = raster.height;
  if (raster.channels == 3) {
    img.pixels = std::move(raster.pixels);
  } else {
    img.pixels.reserve(raster.pixels.size() * 3);
    for (auto g : raster.pixels) img.pixels.insert(img.pixels.end(), {g, g, g});
  }
  return img;
}

std::string chart_filename(const std::string& ticker, std::size_t start_index,
                           std::optional<double> noise) {
  std::string name = ticker + "_" + std::to_string(start_index);
  if (noise) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_noise%.3f", *noise);
    name += buf;
  }
  return name + ".png";
}

}  // namespace vista
