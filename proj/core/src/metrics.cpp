#include "vista/metrics.hpp"

#include <cmath>
#include <string>

#include "vista/error.hpp"

namespace vista {

MetricSet score(std::span<const double> forecast, std::span<const double> truth) {
  if (forecast.size() != truth.size() || forecast.empty())
    throw Error(Errc::LengthMismatch, "forecast has " + std::to_string(forecast.size()) +
                                          " values, truth has " + std::to_string(truth.size()));
  MetricSet m;
  double sq = 0.0, abs_sum = 0.0, pct = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!std::isfinite(forecast[i]) || !std::isfinite(truth[i]))
      throw Error(Errc::NonFinite, "metrics need finite values");
    const double err = forecast[i] - truth[i];
    sq += err * err;
    abs_sum += std::abs(err);
    double denom = std::abs(truth[i]);
    if (denom < kMapeEpsilon) {
      denom = kMapeEpsilon;
      m.mape_guarded = true;
    }
    pct += std::abs(err) / denom;
  }
  const auto n = static_cast<double>(truth.size());
  m.mse = sq / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = abs_sum / n;
  m.mape = 100.0 * pct / n;
  return m;
}

double improvement_pct(double baseline, double treated) {
  if (!(baseline > 0.0)) throw Error(Errc::ZeroBaseline, "baseline must be positive");
  const double pct = 100.0 * (baseline - treated) / baseline;
  return std::round(pct * 100.0) / 100.0;
}

}  // namespace vista
