#include "vista/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <set>

#include "vista/error.hpp"

namespace vista {
namespace {

using json = nlohmann::ordered_json;

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string noise_label(const std::optional<double>& noise) {
  return noise ? fixed(*noise, 3) : std::string("clean");
}

json metrics_json(const MetricSet& m) {
  return {{"mse", m.mse}, {"rmse", m.rmse}, {"mae", m.mae}, {"mape", m.mape},
          {"mape_guarded", m.mape_guarded}};
}

MetricSet metrics_from(const json& j) {
  MetricSet m;
  m.mse = j.at("mse").get<double>();
  m.rmse = j.at("rmse").get<double>();
  m.mae = j.at("mae").get<double>();
  m.mape = j.at("mape").get<double>();
  m.mape_guarded = j.value("mape_guarded", false);
  return m;
}

// Order-independent mean: sort before summing.
double stable_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoError, "failed to write " + path.string());
}

std::string render_csv(const Table& t) {
  std::string out;
  for (const auto& g : t.group_by) out += g + ",";
  out += "n_segments,mse,rmse,mae,mape,mape_guarded\n";
  for (const auto& row : t.rows) {
    for (const auto& k : row.key) out += k + ",";
    out += std::to_string(row.n_segments) + "," + shortest(row.mean.mse) + "," +
           shortest(row.mean.rmse) + "," + shortest(row.mean.mae) + "," + shortest(row.mean.mape) +
           "," + (row.mean.mape_guarded ? "true" : "false") + "\n";
  }
  return out;
}

std::string metric_cells(const TableRow& row) {
  return " " + std::to_string(row.n_segments) + " | " + fixed(row.mean.mse, 4) + " | " +
         fixed(row.mean.rmse, 4) + " | " + fixed(row.mean.mae, 4) + " | " +
         fixed(row.mean.mape, 2) + (row.mean.mape_guarded ? "*" : "") + " |";
}

std::string render_markdown(const Table& t) {
  std::string out;
  const auto ticker_it = std::find(t.group_by.begin(), t.group_by.end(), "ticker");
  bool guarded = false;
  for (const auto& row : t.rows) guarded = guarded || row.mean.mape_guarded;

  if (ticker_it == t.group_by.end()) {
    out += "|";
    for (const auto& g : t.group_by) out += " " + g + " |";
    out += " n | MSE | RMSE | MAE | MAPE (%) |\n|";
    for (std::size_t i = 0; i < t.group_by.size() + 5; ++i) out += "---|";
    out += "\n";
    for (const auto& row : t.rows) {
      out += "|";
      for (const auto& k : row.key) out += " " + k + " |";
      out += metric_cells(row) + "\n";
    }
  } else {
    // Pivot: one row per remaining key, one column block per ticker.
    const auto ticker_pos = static_cast<std::size_t>(ticker_it - t.group_by.begin());
    std::set<std::string> tickers;
    std::map<std::vector<std::string>, std::map<std::string, const TableRow*>> grid;
    for (const auto& row : t.rows) {
      auto rest = row.key;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(ticker_pos));
      tickers.insert(row.key[ticker_pos]);
      grid[rest][row.key[ticker_pos]] = &row;
    }
    out += "|";
    std::size_t cols = 0;
    for (std::size_t i = 0; i < t.group_by.size(); ++i) {
      if (i == ticker_pos) continue;
      out += " " + t.group_by[i] + " |";
      ++cols;
    }
    for (const auto& tk : tickers) {
      out += " " + tk + " n | " + tk + " MSE | " + tk + " RMSE | " + tk + " MAE | " + tk +
             " MAPE (%) |";
      cols += 5;
    }
    out += "\n|";
    for (std::size_t i = 0; i < cols; ++i) out += "---|";
    out += "\n";
    for (const auto& [rest, by_ticker] : grid) {
      out += "|";
      for (const auto& k : rest) out += " " + k + " |";
      for (const auto& tk : tickers) {
        const auto it = by_ticker.find(tk);
        if (it == by_ticker.end()) out += " - | - | - | - | - |";
        else out += metric_cells(*it->second);
      }
      out += "\n";
    }
  }
  if (guarded) out += "\n\\* MAPE denominator floored at 1e-8 for at least one segment.\n";
  return out;
}

std::string render_json(const Table& t) {
  json doc;
  doc["v"] = kRecordSchemaVersion;
  doc["group_by"] = t.group_by;
  doc["rows"] = json::array();
  for (const auto& row : t.rows) {
    json key = json::object();
    for (std::size_t i = 0; i < t.group_by.size(); ++i) key[t.group_by[i]] = row.key[i];
    json r = {{"key", key}, {"n_segments", row.n_segments}};
    r["metrics"] = metrics_json(row.mean);
    doc["rows"].push_back(std::move(r));
  }
  return doc.dump(2) + "\n";
}

}  // namespace

std::string to_json_line(const EvalRecord& r) {
  json j;
  j["v"] = kRecordSchemaVersion;
  j["task_id"] = r.task_id;
  j["ticker"] = r.ticker;
  j["model_id"] = r.model_id;
  j["mode"] = r.mode;
  j["noise"] = r.noise ? json(*r.noise) : json(nullptr);
  j["start_index"] = r.start_index;
  j["metrics"] = metrics_json(r.metrics);
  j["forecast"] = r.forecast;
  j["truth"] = r.truth;
  j["raw_ref"] = r.raw_ref;
  j["parse_strategy"] = r.parse_strategy;
  j["out_of_range"] = r.out_of_range;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

EvalRecord parse_record_line(std::string_view line) {
  const auto j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::CorruptFile, "record line is not JSON");
  try {
    if (j.at("v").get<int>() != kRecordSchemaVersion)
      throw Error(Errc::CorruptFile, "unsupported record schema version");
    EvalRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.ticker = j.at("ticker").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    if (!j.at("noise").is_null()) r.noise = j.at("noise").get<double>();
    r.start_index = j.at("start_index").get<std::size_t>();
    r.metrics = metrics_from(j.at("metrics"));
    r.forecast = j.at("forecast").get<std::vector<double>>();
    r.truth = j.at("truth").get<std::vector<double>>();
    if (r.forecast.size() != r.truth.size())
      throw Error(Errc::CorruptFile, "record forecast and truth lengths differ");
    r.raw_ref = j.value("raw_ref", "");
    r.parse_strategy = j.value("parse_strategy", "");
    r.out_of_range = j.value("out_of_range", false);
    r.timestamp = j.value("timestamp", "");
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, std::string("record schema violation: ") + e.what());
  }
}

RecordFile read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  RecordFile out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.records.push_back(parse_record_line(line));
    } catch (const Error&) {
      ++out.bad_lines;
    }
  }
  return out;
}

std::string group_value(const EvalRecord& r, std::string_view field) {
  if (field == "ticker") return r.ticker;
  if (field == "model_id" || field == "model") return r.model_id;
  if (field == "mode") return r.mode;
  if (field == "noise") return noise_label(r.noise);
  if (field == "start_index") return std::to_string(r.start_index);
  throw Error(Errc::InvalidArgument, "unknown group field '" + std::string(field) + "'");
}

Table aggregate(std::span<const EvalRecord> records, std::span<const std::string> group_by) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no records to aggregate");
  std::map<std::vector<std::string>, std::vector<const EvalRecord*>> groups;
  for (const auto& r : records) {
    std::vector<std::string> key;
    for (const auto& g : group_by) key.push_back(group_value(r, g));
    groups[key].push_back(&r);
  }
  Table t;
  t.group_by.assign(group_by.begin(), group_by.end());
  for (const auto& [key, members] : groups) {
    TableRow row;
    row.key = key;
    row.n_segments = members.size();
    std::vector<double> mse, rmse, mae, mape;
    for (const auto* r : members) {
      mse.push_back(r->metrics.mse);
      rmse.push_back(r->metrics.rmse);
      mae.push_back(r->metrics.mae);
      mape.push_back(r->metrics.mape);
      row.mean.mape_guarded = row.mean.mape_guarded || r->metrics.mape_guarded;
    }
    row.mean.mse = stable_mean(std::move(mse));
    row.mean.rmse = stable_mean(std::move(rmse));
    row.mean.mae = stable_mean(std::move(mae));
    row.mean.mape = stable_mean(std::move(mape));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "md" || name == "markdown") return ReportFormat::Markdown;
  if (name == "json") return ReportFormat::Json;
  throw Error(Errc::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

std::string render_table(const Table& table, ReportFormat format) {
  if (table.rows.empty()) throw Error(Errc::EmptyInput, "table has no rows");
  switch (format) {
    case ReportFormat::Csv: return render_csv(table);
    case ReportFormat::Markdown: return render_markdown(table);
    case ReportFormat::Json: return render_json(table);
  }
  return {};
}

Table table_from_json(std::string_view text) {
  const auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::CorruptFile, "report is not JSON");
  try {
    Table t;
    t.group_by = doc.at("group_by").get<std::vector<std::string>>();
    for (const auto& r : doc.at("rows")) {
      TableRow row;
      for (const auto& g : t.group_by) row.key.push_back(r.at("key").at(g).get<std::string>());
      row.n_segments = r.at("n_segments").get<std::size_t>();
      row.mean = metrics_from(r.at("metrics"));
      t.rows.push_back(std::move(row));
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, std::string("report schema violation: ") + e.what());
  }
}

std::filesystem::path emit_report(const Table& table, ReportFormat format,
                                  const std::filesystem::path& out_dir) {
  const char* ext = format == ReportFormat::Csv ? "csv" : format == ReportFormat::Markdown ? "md" : "json";
  const auto path = out_dir / (std::string("report.") + ext);
  write_text(path, render_table(table, format));
  return path;
}

std::string render_arima_comparison(std::span<const EvalRecord> records) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no records for the ARIMA comparison");
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    const auto method = r.mode == "arima" ? std::string("ARIMA") : r.model_id + "/" + r.mode;
    if (r.mode != "arima" && r.noise) continue;  // clean charts only
    groups[{r.ticker, method}].push_back(r.metrics.mse);
  }
  json doc;
  doc["v"] = kRecordSchemaVersion;
  doc["metric"] = "mse";
  doc["bars"] = json::array();
  for (auto& [key, values] : groups) {
    const auto n = values.size();
    doc["bars"].push_back({{"ticker", key.first},
                           {"method", key.second},
                           {"mean_mse", stable_mean(std::move(values))},
                           {"n_segments", n}});
  }
  return doc.dump(2) + "\n";
}

std::filesystem::path emit_arima_comparison(std::span<const EvalRecord> records,
                                            const std::filesystem::path& out_dir) {
  const auto path = out_dir / "arima_comparison.json";
  write_text(path, render_arima_comparison(records));
  return path;
}

}  // namespace vista
