#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

#include "vista/charting.hpp"
#include "vista/config.hpp"
#include "vista/data.hpp"
#include "vista/error.hpp"
#include "vista/fetch.hpp"
#include "vista/png.hpp"
#include "vista/report.hpp"
#include "vista/runner.hpp"
#include "vista/stockwell.hpp"

namespace {

using namespace vista;
namespace fs = std::filesystem;

constexpr int kExitError = 1;
constexpr int kExitStrict = 3;

std::vector<std::string> split_fields(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int summarize(const RunManifest& m, bool strict) {
  const auto done = m.count(TaskStatus::Done);
  const auto failed = m.count(TaskStatus::Failed);
  std::cout << "tasks: " << m.tasks.size() << " done: " << done << " failed: " << failed
            << " executed: " << m.executed << " model calls: " << m.model_calls
            << " skipped constant segments: " << m.skipped_constant_segments << "\n";
  if (failed > 0) {
    std::cout << "failed tasks:\n";
    for (const auto& t : m.tasks)
      if (t.status == TaskStatus::Failed) std::cout << "  " << t.id << " [" << t.error_class << "] " << t.error_message << "\n";
  }
  std::cout << "output: " << m.output_dir.string() << "\n";
  const nlohmann::json summary = {{"tasks", m.tasks.size()},   {"done", done},
                                  {"failed", failed},          {"executed", m.executed},
                                  {"model_calls", m.model_calls}};
  std::cout << "summary: " << summary.dump() << std::endl;
  return strict && failed > 0 ? kExitStrict : 0;
}

PriceSeries load_dataset(const DatasetConfig& ds, const ExperimentConfig& cfg) {
  if (!ds.remote_endpoint.empty()) {
    FetchOptions fo;
    fo.cache_dir = cfg.cache_dir;
    return fetch_remote(ds.ticker, ds.from, ds.to, ds.remote_endpoint, fo);
  }
  return load_csv(ds.csv, ds.ticker, ds.from, ds.to);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vista: chart-and-text stock forecasting benchmark"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log every task");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download a quote CSV into the cache");
  std::string f_ticker, f_from = "2014-01-01", f_to = "2020-01-01", f_endpoint, f_cache = "cache";
  fetch->add_option("--ticker", f_ticker)->required();
  fetch->add_option("--from", f_from);
  fetch->add_option("--to", f_to);
  fetch->add_option("--endpoint", f_endpoint, "CSV-over-HTTP quote endpoint")->required();
  fetch->add_option("--cache-dir", f_cache);

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment config");
  std::string r_config;
  bool r_strict = false;
  run_cmd->add_option("--config", r_config)->required()->check(CLI::ExistingFile);
  run_cmd->add_flag("--strict", r_strict, "Exit nonzero when any task failed");

  // resume
  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  std::string m_manifest;
  bool m_strict = false;
  resume_cmd->add_option("--manifest", m_manifest)->required()->check(CLI::ExistingFile);
  resume_cmd->add_flag("--strict", m_strict, "Exit nonzero when any task failed");

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate a records file");
  std::string p_records, p_format = "md", p_out, p_group = "ticker,model_id,mode,noise";
  report_cmd->add_option("--records", p_records)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", p_format)->check(CLI::IsMember({"md", "markdown", "csv", "json"}));
  report_cmd->add_option("--out", p_out, "Output directory (default: alongside the records)");
  report_cmd->add_option("--group-by", p_group, "Comma-separated group fields");

  // stockwell
  auto* st_cmd = app.add_subcommand("stockwell", "S-transform heatmap of a differenced Close series");
  std::string s_input, s_out, s_from = "2014-01-01", s_to = "2020-01-01";
  std::size_t s_noise = 0;
  std::uint64_t s_seed = 42;
  auto* s_input_opt = st_cmd->add_option("--input", s_input, "Quote CSV")->check(CLI::ExistingFile);
  auto* s_noise_opt = st_cmd->add_option("--noise", s_noise, "Use N uniform noise samples instead of a CSV");
  s_input_opt->excludes(s_noise_opt);
  st_cmd->add_option("--seed", s_seed);
  st_cmd->add_option("--from", s_from);
  st_cmd->add_option("--to", s_to);
  st_cmd->add_option("--out", s_out)->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "Render one segment chart for inspection");
  std::string c_config, c_ticker, c_out;
  std::size_t c_start = 0;
  double c_noise = 0.0;
  render_cmd->add_option("--config", c_config)->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--ticker", c_ticker)->required();
  render_cmd->add_option("--start", c_start)->required();
  render_cmd->add_option("--noise", c_noise, "Salt-and-pepper density")->check(CLI::Range(0.0, 0.5));
  render_cmd->add_option("--out", c_out, "PNG path (default: chart file name in the working directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fetch) {
      FetchOptions fo;
      fo.cache_dir = f_cache;
      const auto s = fetch_remote(f_ticker, parse_date(f_from), parse_date(f_to), f_endpoint, fo);
      std::cout << s.ticker << ": " << s.size() << " rows (" << s.dropped_rows << " dropped) -> "
                << cache_path(f_cache, f_ticker, parse_date(f_from), parse_date(f_to)).string() << "\n";
      return 0;
    }
    if (*run_cmd) {
      const auto cfg = load_config(r_config);
      return summarize(run(cfg, RunOptions{verbose}), r_strict);
    }
    if (*resume_cmd) return summarize(resume(m_manifest, RunOptions{verbose}), m_strict);
    if (*report_cmd) {
      const auto file = read_records(p_records);
      if (file.bad_lines > 0) std::cerr << "warning: skipped " << file.bad_lines << " unreadable record lines\n";
      const auto fields = split_fields(p_group);
      const auto table = aggregate(file.records, fields);
      const fs::path out = p_out.empty() ? fs::path(p_records).parent_path() : fs::path(p_out);
      const auto path = emit_report(table, parse_report_format(p_format), out);
      std::cout << path.string() << "\n";
      return 0;
    }
    if (*st_cmd) {
      std::vector<double> signal;
      if (s_noise > 0) {
        signal = noise_reference(s_noise, s_seed);
      } else if (!s_input.empty()) {
        const auto series = load_csv(s_input, fs::path(s_input).stem().string(), parse_date(s_from), parse_date(s_to));
        signal = backward_difference(series.closes);
      } else {
        throw Error(Errc::InvalidArgument, "stockwell needs --input or --noise");
      }
      const auto spec = s_transform(signal);
      export_heatmap(spec, s_out);
      std::cout << s_out << ": " << spec.n_freq << " x " << spec.n_time << "\n";
      return 0;
    }
    if (*render_cmd) {
      const auto cfg = load_config(c_config);
      const DatasetConfig* ds = nullptr;
      for (const auto& d : cfg.datasets)
        if (d.ticker == c_ticker) ds = &d;
      if (!ds) throw Error(Errc::InvalidArgument, "ticker " + c_ticker + " is not in the config");
      const auto series = load_dataset(*ds, cfg);
      const auto segments = make_segments(
          series, SegmentOptions{cfg.input_length, cfg.horizon, cfg.stride, cfg.normalization});
      const ForecastSegment* seg = nullptr;
      for (const auto& s : segments.segments)
        if (s.start_index == c_start) seg = &s;
      if (!seg) throw Error(Errc::InvalidArgument, "no segment starts at " + std::to_string(c_start));
      auto chart = render_line_chart(seg->input, cfg.chart_width, cfg.chart_height);
      std::optional<double> noise;
      if (c_noise > 0.0) {
        noise = c_noise;
        chart = inject_salt_pepper(chart, NoiseSpec{c_noise, cfg.salt_ratio, cfg.seed});
      }
      const fs::path out = c_out.empty() ? fs::path(chart_filename(c_ticker, c_start, noise)) : fs::path(c_out);
      png::write_file(out, encode_png(chart));
      std::cout << out.string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
