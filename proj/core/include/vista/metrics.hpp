#pragma once

#include <span>

namespace vista {

/// Floor applied to |truth| in the MAPE denominator.
inline constexpr double kMapeEpsilon = 1e-8;

struct MetricSet {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;  ///< percent
  bool mape_guarded = false;  ///< some |truth| fell below kMapeEpsilon
};

/// MSE, RMSE, MAE and MAPE (percent) of forecast against truth.
MetricSet score(std::span<const double> forecast, std::span<const double> truth);

/// 100 * (baseline - treated) / baseline, rounded to 2 decimals.
double improvement_pct(double baseline, double treated);

}  // namespace vista
