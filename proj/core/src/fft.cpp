#include "vista/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace vista::fft {
namespace {

void radix2(std::vector<Complex>& a, bool inverse) {
  const auto n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex w = std::polar(1.0, angle * static_cast<double>(k));
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

void bluestein(std::vector<Complex>& a, bool inverse) {
  const auto n = a.size();
  const auto m = std::bit_ceil(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large k.
    const auto k2 = (static_cast<unsigned long long>(k) * k) % (2 * n);
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
  }
  std::vector<Complex> x(m), y(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);
  radix2(x, false);
  radix2(y, false);
  for (std::size_t i = 0; i < m; ++i) x[i] *= y[i];
  radix2(x, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k] / static_cast<double>(m);
}

}  // namespace

void transform(std::vector<Complex>& data, bool inverse) {
  const auto n = data.size();
  if (n <= 1) return;
  if (std::has_single_bit(n)) radix2(data, inverse);
  else bluestein(data, inverse);
}

std::vector<Complex> forward(std::span<const double> signal) {
  std::vector<Complex> out(signal.begin(), signal.end());
  transform(out, false);
  return out;
}

}  // namespace vista::fft
