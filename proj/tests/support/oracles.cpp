#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace vista::oracle {

std::string source_path(const std::string& relative) {
  return std::string(VISTA_SOURCE_DIR) + "/" + relative;
}

std::vector<std::complex<double>> dft_normalized(const std::vector<double>& x) {
  const auto n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double angle = -2.0L * std::numbers::pi_v<long double> *
                                static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      acc += static_cast<long double>(x[t]) * std::complex<long double>(std::cos(angle), std::sin(angle));
    }
    out[k] = std::complex<double>(static_cast<double>(acc.real() / n), static_cast<double>(acc.imag() / n));
  }
  return out;
}

Metrics metrics(const std::vector<double>& f, const std::vector<double>& y) {
  long double se = 0, ae = 0, pe = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double d = static_cast<long double>(f[i]) - static_cast<long double>(y[i]);
    se += d * d;
    ae += std::fabs(d);
    pe += std::fabs(d) / std::max(std::fabs(static_cast<long double>(y[i])), 1e-8L);
  }
  const long double n = static_cast<long double>(y.size());
  const long double mse = se / n;
  return {static_cast<double>(mse), static_cast<double>(std::sqrt(mse)), static_cast<double>(ae / n),
          static_cast<double>(100 * pe / n)};
}

std::vector<std::size_t> enumerate_segment_starts(std::size_t n, std::size_t T, std::size_t h,
                                                  std::size_t stride) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < n; s += stride)
    if (s + T + h <= n) starts.push_back(s);
  return starts;
}

std::vector<double> simulate_arma(std::size_t n, double intercept, const std::vector<double>& phi,
                                  const std::vector<double>& theta, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> shock(0.0, sigma);
  const std::size_t burn = 200;
  std::vector<double> x(n + burn, 0.0), e(n + burn, 0.0);
  for (std::size_t t = 0; t < n + burn; ++t) {
    e[t] = shock(rng);
    double v = intercept + e[t];
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (t > i) v += phi[i] * x[t - 1 - i];
    for (std::size_t j = 0; j < theta.size(); ++j)
      if (t > j) v += theta[j] * e[t - 1 - j];
    x[t] = v;
  }
  return {x.begin() + burn, x.end()};
}

GridFit brute_force_arma11(const std::vector<double>& w) {
  GridFit best{0, 0, 0, std::numeric_limits<double>::infinity()};
  const auto n = w.size();
  std::vector<double> e0(n), g(n);
  for (int a = -99; a <= 99; ++a) {
    const double phi = a / 100.0;
    for (int b = -99; b <= 99; ++b) {
      const double theta = b / 100.0;
      // Residuals are affine in the intercept c: e_t = e0_t + c * g_t.
      e0[0] = 0.0;
      g[0] = 0.0;
      for (std::size_t t = 1; t < n; ++t) {
        e0[t] = w[t] - phi * w[t - 1] - theta * e0[t - 1];
        g[t] = -1.0 - theta * g[t - 1];
      }
      double eg = 0.0, gg = 0.0;
      for (std::size_t t = 1; t < n; ++t) {
        eg += e0[t] * g[t];
        gg += g[t] * g[t];
      }
      const double c = -eg / gg;
      double sse = 0.0;
      for (std::size_t t = 1; t < n; ++t) {
        const double r = e0[t] + c * g[t];
        sse += r * r;
      }
      if (sse < best.sse) best = {phi, theta, c, sse};
    }
  }
  return best;
}

std::size_t changed_pixels(const ChartImage& a, const ChartImage& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.pixels.size(); i += 3)
    if (a.pixels[i] != b.pixels[i] || a.pixels[i + 1] != b.pixels[i + 1] || a.pixels[i + 2] != b.pixels[i + 2]) ++n;
  return n;
}

std::size_t count_color(const ChartImage& img, Rgb color) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < img.pixels.size(); i += 3)
    if (img.pixels[i] == color[0] && img.pixels[i + 1] == color[1] && img.pixels[i + 2] == color[2]) ++n;
  return n;
}

}  // namespace vista::oracle
