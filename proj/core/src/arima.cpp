#include "vista/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "vista/error.hpp"

namespace vista::arima {
namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();
constexpr double kMinSigma2 = 1e-300;

using Matrix = std::vector<std::vector<double>>;

// Least squares via normal equations with partial pivoting. Columns whose pivot
// collapses (collinear regressors) get a zero coefficient.
std::vector<double> solve_normal_equations(Matrix a, std::vector<double> b) {
  const auto n = b.size();
  std::vector<bool> dropped(n, false);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i][i]));
  const double eps = 1e-12 * std::max(scale, 1.0);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < eps) {
      dropped[col] = true;
      continue;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (!dropped[i]) x[i] = b[i] / a[i][i];
  return x;
}

// Regresses y on the given regressor rows (each row includes the constant).
std::vector<double> least_squares(const Matrix& rows, std::span<const double> y) {
  const auto k = rows.front().size();
  Matrix xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      xty[i] += rows[r][i] * y[r];
      for (std::size_t j = 0; j < k; ++j) xtx[i][j] += rows[r][i] * rows[r][j];
    }
  }
  return solve_normal_equations(std::move(xtx), std::move(xty));
}

struct Params {
  double intercept = 0.0;
  std::vector<double> phi;
  std::vector<double> theta;
};

std::vector<double> pack(const Params& p) {
  std::vector<double> x{p.intercept};
  x.insert(x.end(), p.phi.begin(), p.phi.end());
  x.insert(x.end(), p.theta.begin(), p.theta.end());
  return x;
}

// Levinson step-down: every reflection coefficient must satisfy |r| < bound.
bool reflection_bounded(std::span<const double> coeffs, double bound) {
  std::vector<double> a(coeffs.begin(), coeffs.end());
  for (std::size_t k = a.size(); k > 0; --k) {
    const double r = a[k - 1];
    if (!(std::abs(r) < bound)) return false;
    std::vector<double> next(k - 1);
    for (std::size_t j = 0; j + 1 < k; ++j) next[j] = (a[j] + r * a[k - 2 - j]) / (1.0 - r * r);
    a = std::move(next);
  }
  return true;
}

Params unpack(std::span<const double> x, int p, int q) {
  Params out;
  out.intercept = x[0];
  out.phi.assign(x.begin() + 1, x.begin() + 1 + p);
  out.theta.assign(x.begin() + 1 + p, x.begin() + 1 + p + q);
  return out;
}

double css_objective(std::span<const double> w, const Params& params) {
  if (!is_stationary(params.phi) || !is_invertible(params.theta)) return kInfeasible;
  const auto e = css_residuals(w, params.intercept, params.phi, params.theta);
  double sse = 0.0;
  for (std::size_t t = params.phi.size(); t < e.size(); ++t) sse += e[t] * e[t];
  return std::isfinite(sse) ? sse : kInfeasible;
}

// AR(p) by OLS on lagged values; this is the exact CSS minimizer when q = 0.
std::optional<Params> ols_ar(std::span<const double> w, int p) {
  Matrix rows;
  std::vector<double> y;
  for (std::size_t t = static_cast<std::size_t>(p); t < w.size(); ++t) {
    std::vector<double> row{1.0};
    for (int i = 1; i <= p; ++i) row.push_back(w[t - static_cast<std::size_t>(i)]);
    rows.push_back(std::move(row));
    y.push_back(w[t]);
  }
  if (rows.empty()) return std::nullopt;
  const auto beta = least_squares(rows, y);
  Params out;
  out.intercept = beta[0];
  out.phi.assign(beta.begin() + 1, beta.end());
  return out;
}

std::vector<double> yule_walker(std::span<const double> w, int p) {
  const auto n = w.size();
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(n);
  std::vector<double> acov(static_cast<std::size_t>(p) + 1, 0.0);
  for (int k = 0; k <= p; ++k)
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t)
      acov[static_cast<std::size_t>(k)] += (w[t] - mean) * (w[t - static_cast<std::size_t>(k)] - mean);
  if (acov[0] <= 0.0) return std::vector<double>(static_cast<std::size_t>(p), 0.0);
  Matrix r(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(p)));
  std::vector<double> rhs(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    rhs[static_cast<std::size_t>(i)] = acov[static_cast<std::size_t>(i) + 1] / acov[0];
    for (int j = 0; j < p; ++j)
      r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          acov[static_cast<std::size_t>(std::abs(i - j))] / acov[0];
  }
  return solve_normal_equations(std::move(r), std::move(rhs));
}

// Hannan-Rissanen: long AR for residual estimates, then OLS on lagged values
// and lagged residuals.
std::optional<Params> hannan_rissanen(std::span<const double> w, int p, int q) {
  const int long_order = std::clamp(static_cast<int>(w.size() / 8), p + q, 10);
  const auto ar = ols_ar(w, long_order);
  if (!ar) return std::nullopt;
  const auto resid = css_residuals(w, ar->intercept, ar->phi, {});
  const auto start = static_cast<std::size_t>(long_order + q);
  Matrix rows;
  std::vector<double> y;
  for (std::size_t t = std::max<std::size_t>(start, static_cast<std::size_t>(p)); t < w.size(); ++t) {
    std::vector<double> row{1.0};
    for (int i = 1; i <= p; ++i) row.push_back(w[t - static_cast<std::size_t>(i)]);
    for (int j = 1; j <= q; ++j) row.push_back(resid[t - static_cast<std::size_t>(j)]);
    rows.push_back(std::move(row));
    y.push_back(w[t]);
  }
  if (rows.size() < static_cast<std::size_t>(p + q + 2)) return std::nullopt;
  const auto beta = least_squares(rows, y);
  return unpack(beta, p, q);
}

struct SimplexResult {
  std::vector<double> x;
  double f;
  bool converged;
};

template <typename F>
SimplexResult nelder_mead(F&& f, std::vector<double> x0, std::span<const double> steps,
                          int max_iterations, double tolerance) {
  const auto n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> idx(n + 1);
  const auto sort_simplex = [&] {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2;
    std::vector<double> v2;
    for (auto i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  const auto blend = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  for (int iter = 0; iter < max_iterations; ++iter) {
    sort_simplex();
    const double best = vals.front();
    const double worst = vals.back();
    if (std::isfinite(worst) && worst - best <= tolerance * std::abs(best) + 1e-30)
      return {pts.front(), best, true};

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

    const auto reflected = blend(centroid, pts.back(), -1.0);
    const double fr = f(reflected);
    if (fr < vals.front()) {
      const auto expanded = blend(centroid, pts.back(), -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        pts.back() = expanded;
        vals.back() = fe;
      } else {
        pts.back() = reflected;
        vals.back() = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts.back() = reflected;
      vals.back() = fr;
    } else {
      const bool outside = fr < vals.back();
      const auto contracted = outside ? blend(centroid, reflected, 0.5) : blend(centroid, pts.back(), 0.5);
      const double fc = f(contracted);
      if (fc < (outside ? fr : vals.back())) {
        pts.back() = contracted;
        vals.back() = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[i] = blend(pts.front(), pts[i], 0.5);
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  sort_simplex();
  return {pts.front(), vals.front(), false};
}

void require_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "series contains a non-finite value");
}

Fit finish(Order order, const Params& params, std::span<const double> w, bool converged) {
  Fit fit;
  fit.order = order;
  fit.phi = params.phi;
  fit.theta = params.theta;
  fit.intercept = params.intercept;
  fit.n_obs = w.size() - static_cast<std::size_t>(order.p);
  fit.sse = css_objective(w, params);
  fit.sigma2 = std::max(fit.sse / static_cast<double>(fit.n_obs), kMinSigma2);
  fit.aic = static_cast<double>(fit.n_obs) * std::log(fit.sigma2) +
            2.0 * static_cast<double>(order.p + order.q + 1);
  fit.converged = converged;
  return fit;
}

}  // namespace

std::string Order::to_string() const {
  return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
}

std::vector<double> difference(std::span<const double> values, int d) {
  std::vector<double> out(values.begin(), values.end());
  for (int k = 0; k < d; ++k) {
    if (out.size() < 2) throw Error(Errc::TooShort, "series too short to difference");
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
    out.pop_back();
  }
  return out;
}

std::vector<double> integrate(std::span<const double> differenced, std::span<const double> initial,
                              int d) {
  if (static_cast<int>(initial.size()) < d)
    throw Error(Errc::InvalidArgument, "integration needs d initial values");
  std::vector<double> level(differenced.begin(), differenced.end());
  for (int k = d - 1; k >= 0; --k) {
    // First value of the k-th difference of the initial values.
    const auto seed = difference(initial.first(static_cast<std::size_t>(d)), k).front();
    std::vector<double> up{seed};
    up.reserve(level.size() + 1);
    for (double v : level) up.push_back(up.back() + v);
    level = std::move(up);
  }
  return level;
}

bool is_stationary(std::span<const double> phi) { return reflection_bounded(phi, 1.0); }

bool is_invertible(std::span<const double> theta) {
  std::vector<double> neg(theta.size());
  std::transform(theta.begin(), theta.end(), neg.begin(), [](double v) { return -v; });
  return is_stationary(neg);
}

std::vector<double> css_residuals(std::span<const double> w, double intercept,
                                  std::span<const double> phi, std::span<const double> theta) {
  const auto p = phi.size();
  std::vector<double> e(w.size(), 0.0);
  for (std::size_t t = p; t < w.size(); ++t) {
    double pred = intercept;
    for (std::size_t i = 1; i <= p; ++i) pred += phi[i - 1] * w[t - i];
    for (std::size_t j = 1; j <= theta.size() && j <= t; ++j) pred += theta[j - 1] * e[t - j];
    e[t] = w[t] - pred;
  }
  return e;
}

Fit fit_css(std::span<const double> values, Order order, const FitOptions& options) {
  if (order.p < 0 || order.d < 0 || order.q < 0)
    throw Error(Errc::InvalidArgument, "ARIMA orders must be non-negative");
  const auto needed = kMinObservations + static_cast<std::size_t>(order.p + order.d + order.q);
  if (values.size() < needed)
    throw Error(Errc::TooShort, "ARIMA" + order.to_string() + " needs at least " +
                                    std::to_string(needed) + " values");
  require_finite(values);

  const auto w = difference(values, order.d);
  const int p = order.p;
  const int q = order.q;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());

  if (q == 0) {
    if (auto ols = ols_ar(w, p); ols && is_stationary(ols->phi)) return finish(order, *ols, w, true);
  }

  // Candidate starts: zero coefficients, then Yule-Walker (q = 0) or Hannan-Rissanen.
  std::vector<Params> starts;
  starts.push_back(Params{mean, std::vector<double>(static_cast<std::size_t>(p), 0.0),
                          std::vector<double>(static_cast<std::size_t>(q), 0.0)});
  if (q == 0 && p > 0) {
    Params yw{0.0, yule_walker(w, p), {}};
    yw.intercept = mean * (1.0 - std::accumulate(yw.phi.begin(), yw.phi.end(), 0.0));
    if (is_stationary(yw.phi)) starts.push_back(std::move(yw));
  } else if (q > 0) {
    if (auto hr = hannan_rissanen(w, p, q); hr && is_stationary(hr->phi) && is_invertible(hr->theta))
      starts.push_back(std::move(*hr));
  }

  double spread = 0.0;
  for (double v : w) spread += (v - mean) * (v - mean);
  spread = std::sqrt(spread / static_cast<double>(w.size()));
  std::vector<double> steps(static_cast<std::size_t>(1 + p + q), 0.1);
  steps[0] = std::max(0.1 * spread, 1e-4);

  const auto objective = [&](const std::vector<double>& x) {
    return css_objective(w, unpack(x, p, q));
  };

  std::optional<SimplexResult> best;
  for (const auto& start : starts) {
    auto run = nelder_mead(objective, pack(start), steps, options.max_iterations, options.tolerance);
    // Restart from the incumbent until a fresh simplex stops improving it.
    for (int restart = 0; restart < 3; ++restart) {
      auto next = nelder_mead(objective, run.x, steps, options.max_iterations, options.tolerance);
      const bool improved = next.f < run.f - options.tolerance * std::abs(run.f);
      if (next.f <= run.f) run = std::move(next);
      if (!improved) break;
    }
    if (!best || run.f < best->f) best = run;
  }
  return finish(order, unpack(best->x, p, q), w, best->converged);
}

std::vector<Order> default_grid() {
  std::vector<Order> grid;
  for (int p = 0; p <= kMaxGridOrder; ++p)
    for (int d = 0; d <= kMaxGridOrder; ++d)
      for (int q = 0; q <= kMaxGridOrder; ++q) grid.push_back({p, d, q});
  return grid;
}

Fit select_order(std::span<const double> values, std::span<const Order> grid,
                 const FitOptions& options) {
  if (grid.empty()) throw Error(Errc::InvalidArgument, "order grid is empty");
  std::optional<Fit> best;
  const auto better = [](const Fit& a, const Fit& b) {
    if (a.aic != b.aic) return a.aic < b.aic;
    const int ka = a.order.p + a.order.q, kb = b.order.p + b.order.q;
    if (ka != kb) return ka < kb;
    if (a.order.d != b.order.d) return a.order.d < b.order.d;
    return a.order.p < b.order.p;
  };
  std::string last_error;
  for (const auto& order : grid) {
    try {
      auto fit = fit_css(values, order, options);
      if (!std::isfinite(fit.aic)) continue;
      if (!best || better(fit, *best)) best = std::move(fit);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!best) throw Error(Errc::AllFitsFailed, "no order in the grid could be fitted", last_error);
  return *best;
}

std::vector<double> forecast(const Fit& fit, std::span<const double> values, std::size_t h) {
  if (h < 1) throw Error(Errc::InvalidArgument, "horizon must be >= 1");
  const auto p = static_cast<std::size_t>(fit.order.p);
  const auto q = static_cast<std::size_t>(fit.order.q);
  if (fit.phi.size() != p || fit.theta.size() != q)
    throw Error(Errc::InvalidArgument, "fit coefficients do not match its order");

  std::vector<double> w = difference(values, fit.order.d);
  std::vector<double> e = css_residuals(w, fit.intercept, fit.phi, fit.theta);
  const auto n = w.size();
  for (std::size_t k = 0; k < h; ++k) {
    const auto t = n + k;
    double next = fit.intercept;
    for (std::size_t i = 1; i <= p; ++i)
      if (t >= i) next += fit.phi[i - 1] * w[t - i];
    for (std::size_t j = 1; j <= q; ++j)
      if (t >= j) next += fit.theta[j - 1] * e[t - j];
    w.push_back(next);
    e.push_back(0.0);
  }
  std::vector<double> future(w.end() - static_cast<std::ptrdiff_t>(h), w.end());

  // Undo differencing level by level, anchoring on the last observed value of each level.
  for (int k = fit.order.d - 1; k >= 0; --k) {
    const auto level = difference(values, k);
    double prev = level.back();
    for (auto& v : future) {
      v += prev;
      prev = v;
    }
  }
  return future;
}

}  // namespace vista::arima
