#include "vista/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vista/error.hpp"

namespace vista {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(begin, i - begin)));
      begin = i + 1;
    }
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool try_parse_date(std::string_view s, Date& out) {
  // Accept a trailing time component ("2014-01-02 00:00:00") by keeping the date part.
  if (s.size() > 10 && (s[10] == ' ' || s[10] == 'T')) s = s.substr(0, 10);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0, m = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
      !parse_int(s.substr(8, 2), d))
    return false;
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return false;
  out = date;
  return true;
}

bool try_parse_price(std::string_view s, double& out) {
  if (s.empty()) return false;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return false;
  if (!std::isfinite(v) || v <= 0.0) return false;
  out = v;
  return true;
}

void require_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "series contains a non-finite value");
}

}  // namespace

Date parse_date(std::string_view text) {
  Date d;
  if (!try_parse_date(trim(text), d))
    throw Error(Errc::InvalidArgument, "not a YYYY-MM-DD date: '" + std::string(text) + "'");
  return d;
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

PriceSeries parse_csv(std::string_view body, std::string_view ticker, Date date_from,
                      Date date_to) {
  if (body.size() >= 3 && body.substr(0, 3) == "\xEF\xBB\xBF") body.remove_prefix(3);

  std::vector<std::string_view> lines;
  {
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i == body.size() || body[i] == '\n') {
        auto line = body.substr(begin, i - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!trim(line).empty()) lines.push_back(line);
        begin = i + 1;
      }
    }
  }
  if (lines.empty()) throw Error(Errc::MissingColumn, "CSV has no header row");

  const auto header = split_fields(lines.front());
  const auto find_col = [&](std::string_view name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto date_col = find_col("Date");
  const auto close_col = find_col("Close");
  if (date_col < 0 || close_col < 0)
    throw Error(Errc::MissingColumn, "CSV header must contain Date and Close columns");

  struct Row {
    Date date;
    double close;
  };
  std::vector<Row> rows;
  std::size_t dropped = 0;
  const std::size_t data_rows = lines.size() - 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    Row row{};
    const auto need = static_cast<std::size_t>(std::max(date_col, close_col));
    if (fields.size() <= need || !try_parse_date(fields[date_col], row.date) ||
        !try_parse_price(fields[close_col], row.close)) {
      ++dropped;
      continue;
    }
    rows.push_back(row);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  const auto unique_end = std::unique(rows.begin(), rows.end(),
                                      [](const Row& a, const Row& b) { return a.date == b.date; });
  dropped += static_cast<std::size_t>(rows.end() - unique_end);
  rows.erase(unique_end, rows.end());

  if (data_rows > 0 &&
      static_cast<double>(dropped) > kMaxDroppedFraction * static_cast<double>(data_rows)) {
    throw Error(Errc::CorruptFile, std::to_string(dropped) + " of " + std::to_string(data_rows) +
                                       " rows are malformed");
  }

  PriceSeries series;
  series.ticker = std::string(ticker);
  series.dropped_rows = dropped;
  for (const auto& row : rows) {
    if (row.date < date_from || !(row.date < date_to)) continue;
    series.dates.push_back(row.date);
    series.closes.push_back(row.close);
  }
  if (series.closes.empty())
    throw Error(Errc::EmptyRange, "no rows in [" + format_date(date_from) + ", " +
                                      format_date(date_to) + ")");
  return series;
}

PriceSeries load_csv(const std::filesystem::path& path, std::string_view ticker, Date date_from,
                     Date date_to) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), ticker, date_from, date_to);
}

NormalizedSeries minmax_normalize(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::TooShort, "normalization needs at least 2 values");
  require_finite(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*hi > *lo)) throw Error(Errc::ConstantSeries, "max == min");
  NormalizedSeries ns;
  ns.min = *lo;
  ns.max = *hi;
  ns.values = normalize_with(ns.scale(), values);
  return ns;
}

std::vector<double> normalize_with(Scale scale, std::span<const double> values) {
  if (!(scale.max > scale.min)) throw Error(Errc::ConstantSeries, "max == min");
  const double range = scale.max - scale.min;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    // The exact endpoints map to exactly 0 and 1.
    if (v == scale.min) out.push_back(0.0);
    else if (v == scale.max) out.push_back(1.0);
    else out.push_back((v - scale.min) / range);
  }
  return out;
}

std::vector<double> denormalize(Scale scale, std::span<const double> values) {
  const double range = scale.max - scale.min;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(v * range + scale.min);
  return out;
}

std::vector<double> backward_difference(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::TooShort, "difference needs at least 2 values");
  std::vector<double> out(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) out[i] = values[i + 1] - values[i];
  return out;
}

std::size_t segment_count(std::size_t length, std::size_t input_length, std::size_t horizon,
                          std::size_t stride) {
  if (stride == 0 || length < input_length + horizon) return 0;
  return (length - input_length - horizon) / stride + 1;
}

SegmentPlan make_segments(std::span<const double> closes, const SegmentOptions& options) {
  const auto T = options.input_length;
  const auto h = options.horizon;
  if (T < 2 || h < 1 || options.stride < 1)
    throw Error(Errc::InvalidArgument, "require T >= 2, h >= 1, stride >= 1");
  if (closes.size() < T + h)
    throw Error(Errc::TooShort, "series length " + std::to_string(closes.size()) +
                                    " < T + h = " + std::to_string(T + h));
  require_finite(closes);

  Scale whole{};
  if (options.scope == NormalizationScope::WholeSeries) {
    const auto [lo, hi] = std::minmax_element(closes.begin(), closes.end());
    whole = {*lo, *hi};
  }

  SegmentPlan plan;
  const auto n = segment_count(closes.size(), T, h, options.stride);
  for (std::size_t k = 0; k < n; ++k) {
    const auto start = k * options.stride;
    const auto input = closes.subspan(start, T);
    const auto truth = closes.subspan(start + T, h);
    Scale scale = whole;
    if (options.scope == NormalizationScope::InputWindow) {
      const auto [lo, hi] = std::minmax_element(input.begin(), input.end());
      scale = {*lo, *hi};
    }
    if (!(scale.max > scale.min)) {
      ++plan.skipped_constant;
      continue;
    }
    ForecastSegment seg;
    seg.start_index = start;
    seg.scale = scale;
    seg.input = normalize_with(scale, input);
    seg.truth = normalize_with(scale, truth);
    plan.segments.push_back(std::move(seg));
  }
  return plan;
}

SegmentPlan make_segments(const PriceSeries& series, std::size_t input_length,
                          std::size_t horizon, std::size_t stride) {
  return make_segments(series.closes, SegmentOptions{input_length, horizon, stride,
                                                     NormalizationScope::InputWindow});
}

}  // namespace vista
