#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vista {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws Error(InvalidArgument).
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Dated close prices for one ticker. Dates strictly increase; closes are
/// finite and positive.
struct PriceSeries {
  std::string ticker;
  std::vector<Date> dates;
  std::vector<double> closes;
  /// Rows dropped while loading (missing/non-numeric Close, bad date, duplicate date).
  std::size_t dropped_rows = 0;

  std::size_t size() const noexcept { return closes.size(); }
};

/// Original-scale bounds of a min-max normalization.
struct Scale {
  double min = 0.0;
  double max = 1.0;

  bool operator==(const Scale&) const = default;
};

struct NormalizedSeries {
  std::vector<double> values;
  double min = 0.0;
  double max = 1.0;

  Scale scale() const noexcept { return {min, max}; }
};

/// One (input window, ground-truth horizon) evaluation unit in normalized space.
/// Truth is scaled with the input window's bounds and may leave [0,1].
struct ForecastSegment {
  std::vector<double> input;
  std::vector<double> truth;
  std::size_t start_index = 0;
  Scale scale;
};

enum class NormalizationScope {
  InputWindow,  ///< fit (min,max) on each segment's input window
  WholeSeries,  ///< fit (min,max) once over the full loaded series
};

struct SegmentOptions {
  std::size_t input_length = 100;
  std::size_t horizon = 5;
  std::size_t stride = 5;
  NormalizationScope scope = NormalizationScope::InputWindow;
};

struct SegmentPlan {
  std::vector<ForecastSegment> segments;
  std::size_t skipped_constant = 0;
};

/// Fraction of malformed data rows above which a file is rejected as corrupt.
inline constexpr double kMaxDroppedFraction = 0.10;

/// Reads a Yahoo-style CSV (header with Date and Close columns) and keeps rows
/// with date_from <= date < date_to, sorted ascending.
PriceSeries load_csv(const std::filesystem::path& path, std::string_view ticker, Date date_from,
                     Date date_to);

/// Same contract as load_csv, over an in-memory CSV body.
PriceSeries parse_csv(std::string_view body, std::string_view ticker, Date date_from,
                      Date date_to);

NormalizedSeries minmax_normalize(std::span<const double> values);
std::vector<double> normalize_with(Scale scale, std::span<const double> values);
std::vector<double> denormalize(Scale scale, std::span<const double> values);
inline std::vector<double> denormalize(const NormalizedSeries& ns, std::span<const double> values) {
  return denormalize(ns.scale(), values);
}

/// out[i] = values[i+1] - values[i].
std::vector<double> backward_difference(std::span<const double> values);

/// Number of windows make_segments enumerates before constant-window skipping.
std::size_t segment_count(std::size_t length, std::size_t input_length, std::size_t horizon,
                          std::size_t stride);

SegmentPlan make_segments(std::span<const double> closes, const SegmentOptions& options);
inline SegmentPlan make_segments(const PriceSeries& series, const SegmentOptions& options) {
  return make_segments(series.closes, options);
}
SegmentPlan make_segments(const PriceSeries& series, std::size_t input_length,
                          std::size_t horizon, std::size_t stride);

}  // namespace vista
