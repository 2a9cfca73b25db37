#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vista::arima {

struct Order {
  int p = 0;
  int d = 0;
  int q = 0;

  bool operator==(const Order&) const = default;
  std::string to_string() const;
};

/// Conditional-sum-of-squares fit of
///   w_t = intercept + sum_i phi_i w_{t-i} + sum_j theta_j e_{t-j} + e_t
/// on the d-times differenced series w, conditioning on the first p values and
/// with pre-sample residuals fixed at zero.
struct Fit {
  Order order;
  std::vector<double> phi;
  std::vector<double> theta;
  double intercept = 0.0;
  double sigma2 = 0.0;
  double sse = 0.0;
  double aic = 0.0;
  std::size_t n_obs = 0;  ///< number of residuals in the SSE
  bool converged = true;  ///< false when the iteration cap stopped the search
};

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;  ///< relative SSE spread at which the simplex stops
};

inline constexpr int kMaxGridOrder = 2;
inline constexpr std::size_t kMinObservations = 20;

std::vector<double> difference(std::span<const double> values, int d);
/// Inverse of difference(): rebuilds the series from its d-th differences and
/// the first d original values.
std::vector<double> integrate(std::span<const double> differenced, std::span<const double> initial,
                              int d);

/// True when all roots of 1 - phi_1 z - ... - phi_p z^p lie outside the unit circle.
bool is_stationary(std::span<const double> phi);
/// True when all roots of 1 + theta_1 z + ... + theta_q z^q lie outside the unit circle.
bool is_invertible(std::span<const double> theta);

/// CSS residuals of w under the given parameters (e_t = 0 for t < p).
std::vector<double> css_residuals(std::span<const double> w, double intercept,
                                  std::span<const double> phi, std::span<const double> theta);

Fit fit_css(std::span<const double> values, Order order, const FitOptions& options = {});

/// All (p,d,q) in {0,1,2}^3.
std::vector<Order> default_grid();

/// Minimum-AIC fit over `grid`; ties go to smaller p+q, then smaller d, then smaller p.
Fit select_order(std::span<const double> values, std::span<const Order> grid,
                 const FitOptions& options = {});
inline Fit select_order(std::span<const double> values) {
  const auto grid = default_grid();
  return select_order(values, grid);
}

/// h-step forecast in the original level: future shocks are zero, known
/// residuals feed the MA terms, then differencing is inverted.
std::vector<double> forecast(const Fit& fit, std::span<const double> values, std::size_t h);

}  // namespace vista::arima
