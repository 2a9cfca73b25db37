#include "vista/stockwell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "vista/error.hpp"
#include "vista/fft.hpp"

namespace vista {

Spectrogram s_transform(std::span<const double> signal) {
  const auto N = signal.size();
  if (N < kMinStockwellLength) throw Error(Errc::TooShort, "S-transform needs at least 8 samples");
  for (double v : signal)
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "signal contains a non-finite value");

  auto H = fft::forward(signal);
  for (auto& c : H) c /= static_cast<double>(N);

  Spectrogram spec;
  spec.n_freq = N / 2 + 1;
  spec.n_time = N;
  spec.coeffs.resize(spec.n_freq * N);
  spec.time_index.resize(N);
  std::iota(spec.time_index.begin(), spec.time_index.end(), std::size_t{0});
  for (std::size_t n = 0; n < spec.n_freq; ++n)
    spec.freq_bins.push_back(static_cast<double>(n) / static_cast<double>(N));

  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(N);
  std::fill_n(spec.coeffs.begin(), N, std::complex<double>(mean, 0.0));

  const double two_pi_sq = 2.0 * std::numbers::pi * std::numbers::pi;
  std::vector<fft::Complex> voice(N);
  for (std::size_t n = 1; n < spec.n_freq; ++n) {
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t m = 0; m < N; ++m) {
      const double ms = m <= N / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(N);
      voice[m] = H[(m + n) % N] * std::exp(-two_pi_sq * ms * ms / nn);
    }
    fft::transform(voice, true);
    std::copy(voice.begin(), voice.end(), spec.coeffs.begin() + static_cast<std::ptrdiff_t>(n * N));
  }

  spec.magnitudes.resize(spec.coeffs.size());
  std::transform(spec.coeffs.begin(), spec.coeffs.end(), spec.magnitudes.begin(),
                 [](const std::complex<double>& c) { return std::abs(c); });
  return spec;
}

png::Raster render_heatmap(const Spectrogram& spec) {
  png::Raster img;
  img.width = static_cast<std::uint32_t>(spec.n_time);
  img.height = static_cast<std::uint32_t>(spec.n_freq);
  img.channels = 1;
  img.pixels.assign(spec.n_time * spec.n_freq, 0);
  const double peak = spec.magnitudes.empty()
                          ? 0.0
                          : *std::max_element(spec.magnitudes.begin(), spec.magnitudes.end());
  if (peak <= 0.0) return img;
  for (std::size_t n = 0; n < spec.n_freq; ++n) {
    const auto row = spec.n_freq - 1 - n;
    for (std::size_t j = 0; j < spec.n_time; ++j)
      img.pixels[row * spec.n_time + j] =
          static_cast<std::uint8_t>(std::lround(255.0 * spec.magnitude(n, j) / peak));
  }
  return img;
}

void export_heatmap(const Spectrogram& spec, const std::filesystem::path& path) {
  const auto img = render_heatmap(spec);
  png::write_file(path, png::encode(img.width, img.height, img.channels, img.pixels));
}

std::vector<double> noise_reference(std::size_t n, std::uint64_t seed) {
  if (n < kMinStockwellLength) throw Error(Errc::TooShort, "noise reference needs N >= 8");
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return out;
}

}  // namespace vista
