#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vista/png.hpp"

namespace vista {

/// Discrete S-transform coefficients, row n = frequency bin (0..N/2),
/// column j = time sample (0..N-1).
struct Spectrogram {
  std::size_t n_freq = 0;
  std::size_t n_time = 0;
  std::vector<std::complex<double>> coeffs;  ///< row-major n_freq x n_time
  std::vector<double> magnitudes;            ///< |coeffs|
  std::vector<double> freq_bins;             ///< cycles per sample, n / N
  std::vector<std::size_t> time_index;

  std::complex<double> at(std::size_t n, std::size_t j) const { return coeffs[n * n_time + j]; }
  double magnitude(std::size_t n, std::size_t j) const { return magnitudes[n * n_time + j]; }
};

inline constexpr std::size_t kMinStockwellLength = 8;

/// S[j,0] = mean(x); for n >= 1,
///   S[j,n] = sum_m H[(m+n) mod N] exp(-2 pi^2 m^2 / n^2) exp(2 pi i m j / N)
/// with H the 1/N-normalized DFT and m taken over the symmetric range [-N/2, N/2).
/// Averaging any row over time returns H[n].
Spectrogram s_transform(std::span<const double> signal);

/// Grayscale heatmap: rows are frequencies (low at the bottom), columns time,
/// intensity = magnitude scaled by the image maximum.
png::Raster render_heatmap(const Spectrogram& spec);
void export_heatmap(const Spectrogram& spec, const std::filesystem::path& path);

/// Seeded uniform samples on [-0.5, 0.5).
std::vector<double> noise_reference(std::size_t n, std::uint64_t seed);

}  // namespace vista
