#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vista/metrics.hpp"

namespace vista {

inline constexpr int kRecordSchemaVersion = 1;

/// One scored segment; a line of the JSONL results store.
struct EvalRecord {
  std::string task_id;
  std::string ticker;
  std::string model_id;
  std::string mode;  ///< prompt mode name, or "arima"
  std::optional<double> noise;
  std::size_t start_index = 0;
  MetricSet metrics;
  std::vector<double> forecast;
  std::vector<double> truth;
  std::string raw_ref;
  std::string parse_strategy;
  bool out_of_range = false;
  std::string timestamp;  ///< ISO-8601 UTC
};

std::string to_json_line(const EvalRecord& record);
/// Throws Error(CorruptFile) on malformed lines or schema mismatch.
EvalRecord parse_record_line(std::string_view line);

struct RecordFile {
  std::vector<EvalRecord> records;
  std::size_t bad_lines = 0;
};
/// Reads a JSONL results store, skipping (and counting) unparseable lines.
RecordFile read_records(const std::filesystem::path& path);

/// Group fields accepted by aggregate(): ticker, model_id, mode, noise, start_index.
std::string group_value(const EvalRecord& record, std::string_view field);

struct TableRow {
  std::vector<std::string> key;
  std::size_t n_segments = 0;
  MetricSet mean;
};

struct Table {
  std::vector<std::string> group_by;
  std::vector<TableRow> rows;  ///< ordered lexicographically by key
};

Table aggregate(std::span<const EvalRecord> records, std::span<const std::string> group_by);

enum class ReportFormat { Csv, Markdown, Json };
ReportFormat parse_report_format(std::string_view name);

std::string render_table(const Table& table, ReportFormat format);
Table table_from_json(std::string_view text);

/// Writes `<out_dir>/report.{csv,md,json}` and returns the path.
std::filesystem::path emit_report(const Table& table, ReportFormat format,
                                  const std::filesystem::path& out_dir);

/// Bar-chart data comparing mean MSE per (ticker, method) against ARIMA.
std::string render_arima_comparison(std::span<const EvalRecord> records);
std::filesystem::path emit_arima_comparison(std::span<const EvalRecord> records,
                                            const std::filesystem::path& out_dir);

}  // namespace vista
