#pragma once

#include <complex>
#include <span>
#include <vector>

namespace vista::fft {

using Complex = std::complex<double>;

/// In-place unnormalized DFT of any length: X[k] = sum_n x[n] exp(-+2 pi i k n / N),
/// sign + for inverse. Radix-2 for powers of two, Bluestein otherwise.
void transform(std::vector<Complex>& data, bool inverse = false);

std::vector<Complex> forward(std::span<const double> signal);

}  // namespace vista::fft
