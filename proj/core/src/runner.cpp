#include "vista/runner.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "vista/arima.hpp"
#include "vista/charting.hpp"
#include "vista/error.hpp"
#include "vista/fetch.hpp"
#include "vista/metrics.hpp"
#include "vista/model_client.hpp"
#include "vista/report.hpp"

namespace vista {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

void log_line(const std::string& msg) { std::cerr << "[vista] " << msg << '\n'; }

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    out += ok ? c : '-';
  }
  return out;
}

std::string noise_tag(const std::optional<double>& noise) {
  if (!noise) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof buf, "noise%.3f", *noise);
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const fs::path& path, std::string_view text, std::string_view tmp_tag = "tmp") {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += "." + std::string(tmp_tag);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::IoError, "failed to write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string records_text(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json_line(r) + "\n";
  return out;
}

json manifest_json(const RunManifest& m) {
  json j;
  j["v"] = 1;
  j["config_hash"] = m.config_hash;
  j["config"] = json::parse(m.config_json);
  j["base_dir"] = m.base_dir.string();
  j["records"] = kRecordsFile;
  j["summary"] = {{"done", m.count(TaskStatus::Done)},
                  {"failed", m.count(TaskStatus::Failed)},
                  {"pending", m.count(TaskStatus::Pending)}};
  j["tasks"] = json::array();
  for (const auto& t : m.tasks) {
    json task = {{"id", t.id}, {"status", to_string(t.status)}};
    if (!t.error_class.empty()) {
      task["error_class"] = t.error_class;
      task["error"] = t.error_message;
    }
    if (!t.chart.empty()) task["chart"] = t.chart;
    if (!t.prompt.empty()) task["prompt"] = t.prompt;
    if (!t.raw.empty()) task["raw"] = t.raw;
    j["tasks"].push_back(std::move(task));
  }
  return j;
}

struct TaskContext {
  const ExperimentConfig& config;
  const Plan& plan;
  ModelClient& client;
  std::atomic<std::size_t>& model_calls;
  fs::path out;
};

// Runs one task; fills `state` and returns the record on success.
std::optional<EvalRecord> execute(const TaskContext& ctx, const Task& task, TaskState& state) {
  const auto& cfg = ctx.config;
  const auto& ticker = cfg.datasets[task.dataset].ticker;
  const auto& seg = ctx.plan.data.plans[task.dataset].segments[task.segment];

  EvalRecord rec;
  rec.task_id = task.id;
  rec.ticker = ticker;
  rec.start_index = seg.start_index;
  rec.truth = seg.truth;

  if (task.is_arima()) {
    const auto fit = arima::select_order(seg.input, cfg.arima.grid);
    rec.forecast = arima::forecast(fit, seg.input, cfg.horizon);
    rec.model_id = "arima";
    rec.mode = "arima";
    rec.parse_strategy = "arima" + fit.order.to_string();
    json summary = {{"order", {fit.order.p, fit.order.d, fit.order.q}},
                    {"phi", fit.phi},
                    {"theta", fit.theta},
                    {"intercept", fit.intercept},
                    {"sigma2", fit.sigma2},
                    {"aic", fit.aic},
                    {"converged", fit.converged},
                    {"forecast", rec.forecast}};
    state.raw = "raw/" + task.id + ".txt";
    write_atomic(ctx.out / state.raw, summary.dump(2) + "\n");
  } else {
    const auto mode = *task.mode;
    const auto& endpoint = cfg.endpoints[task.endpoint];
    std::optional<ChartImage> chart;
    if (requires_image(mode)) {
      chart = render_line_chart(seg.input, cfg.chart_width, cfg.chart_height);
      chart->meta.segment_id = ticker + "_" + std::to_string(seg.start_index);
      if (task.noise) chart = inject_salt_pepper(*chart, NoiseSpec{*task.noise, cfg.salt_ratio, cfg.seed});
      state.chart = "charts/" + chart_filename(ticker, seg.start_index, task.noise);
    }
    const auto bundle = build_prompt(mode, seg, chart, cfg.decimals);
    if (chart) {
      const auto& png = *bundle.image;
      write_atomic(ctx.out / state.chart, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()),
                   task.id);
    }
    state.prompt = "prompts/" + task.id + ".txt";
    write_atomic(ctx.out / state.prompt, bundle.text);

    ctx.model_calls.fetch_add(1);
    const auto response = ctx.client.complete(endpoint, bundle);
    state.raw = "raw/" + task.id + ".txt";
    write_atomic(ctx.out / state.raw, response.text);

    const auto forecast = parse_forecast(response.text, cfg.horizon);
    rec.forecast = forecast.values;
    rec.model_id = endpoint.model_id;
    rec.mode = std::string(to_string(mode));
    rec.noise = task.noise;
    rec.parse_strategy = std::string(to_string(forecast.parse_strategy));
  }

  rec.raw_ref = state.raw;
  rec.out_of_range = std::any_of(rec.forecast.begin(), rec.forecast.end(),
                                 [](double v) { return v < 0.0 || v > 1.0; });
  if (cfg.metric_space == MetricSpace::Raw) {
    rec.metrics = score(denormalize(seg.scale, rec.forecast), denormalize(seg.scale, rec.truth));
  } else {
    rec.metrics = score(rec.forecast, rec.truth);
  }
  rec.timestamp = utc_timestamp();
  return rec;
}

}  // namespace

std::string_view to_string(TaskStatus status) noexcept {
  switch (status) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Done: return "done";
    case TaskStatus::Failed: return "failed";
  }
  return "pending";
}

std::size_t RunManifest::count(TaskStatus status) const {
  return static_cast<std::size_t>(
      std::count_if(tasks.begin(), tasks.end(), [&](const TaskState& t) { return t.status == status; }));
}

LoadedData load_datasets(const ExperimentConfig& config) {
  LoadedData data;
  const SegmentOptions options{config.input_length, config.horizon, config.stride, config.normalization};
  for (const auto& ds : config.datasets) {
    PriceSeries series;
    if (!ds.remote_endpoint.empty()) {
      FetchOptions fetch;
      fetch.cache_dir = config.cache_dir;
      series = fetch_remote(ds.ticker, ds.from, ds.to, ds.remote_endpoint, fetch);
    } else {
      series = load_csv(ds.csv, ds.ticker, ds.from, ds.to);
    }
    data.plans.push_back(make_segments(series, options));
    data.series.push_back(std::move(series));
  }
  return data;
}

std::vector<Task> plan_tasks(const ExperimentConfig& config, std::span<const SegmentPlan> plans) {
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < plans.size(); ++d) {
    const auto& ticker = config.datasets[d].ticker;
    for (std::size_t s = 0; s < plans[d].segments.size(); ++s) {
      const auto start = plans[d].segments[s].start_index;
      const auto prefix = sanitize(ticker) + "_" + std::to_string(start) + "_";
      for (const auto mode : config.modes) {
        std::vector<std::optional<double>> levels{std::nullopt};
        if (requires_image(mode)) {
          auto sorted = config.noise_coefficients;
          std::sort(sorted.begin(), sorted.end());
          sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
          for (double n : sorted) levels.emplace_back(n);
        }
        for (std::size_t e = 0; e < config.endpoints.size(); ++e) {
          for (const auto& noise : levels) {
            Task t;
            t.dataset = d;
            t.segment = s;
            t.mode = mode;
            t.endpoint = e;
            t.noise = noise;
            t.id = prefix + std::string(to_string(mode)) + "_" + sanitize(config.endpoints[e].model_id) +
                   "_" + noise_tag(noise);
            tasks.push_back(std::move(t));
          }
        }
      }
      if (config.arima.enabled) {
        Task t;
        t.dataset = d;
        t.segment = s;
        t.id = prefix + "arima";
        tasks.push_back(std::move(t));
      }
    }
  }
  return tasks;
}

Plan plan(const ExperimentConfig& config) {
  Plan p;
  p.data = load_datasets(config);
  p.tasks = plan_tasks(config, p.data.plans);
  return p;
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::CorruptManifest, "cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::CorruptManifest, "manifest is not JSON");
  try {
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config_json = j.at("config").dump();
    m.base_dir = j.at("base_dir").get<std::string>();
    m.output_dir = path.parent_path();
    for (const auto& t : j.at("tasks")) {
      TaskState s;
      s.id = t.at("id").get<std::string>();
      const auto status = t.at("status").get<std::string>();
      s.status = status == "done" ? TaskStatus::Done : status == "failed" ? TaskStatus::Failed : TaskStatus::Pending;
      s.error_class = t.value("error_class", "");
      s.error_message = t.value("error", "");
      s.chart = t.value("chart", "");
      s.prompt = t.value("prompt", "");
      s.raw = t.value("raw", "");
      m.tasks.push_back(std::move(s));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptManifest, std::string("manifest schema violation: ") + e.what());
  }
}

RunManifest run(const ExperimentConfig& config, const RunOptions& options) {
  const auto hash = config_hash(config);
  const auto out = config.output_dir;
  const auto manifest_path = out / kManifestFile;
  const auto records_path = out / kRecordsFile;
  fs::create_directories(out);

  std::map<std::string, TaskState> previous;
  if (fs::exists(manifest_path)) {
    auto existing = read_manifest(manifest_path);
    if (existing.config_hash != hash)
      throw Error(Errc::ConfigMismatch, "output directory " + out.string() +
                                            " belongs to a run with config hash " + existing.config_hash);
    for (auto& t : existing.tasks) previous.emplace(t.id, std::move(t));
  }

  const auto p = plan(config);
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < p.tasks.size(); ++i) order.emplace(p.tasks[i].id, i);

  // Records already on disk decide which tasks are done.
  std::vector<std::optional<EvalRecord>> records(p.tasks.size());
  if (fs::exists(records_path)) {
    std::ifstream in(records_path, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        auto rec = parse_record_line(line);
        const auto it = order.find(rec.task_id);
        if (it != order.end() && !records[it->second]) records[it->second] = std::move(rec);
      } catch (const Error& e) {
        log_line("warning: ignoring unreadable record at " + records_path.string() + ":" +
                 std::to_string(line_no) + " (" + e.what() + "); the task will be re-run");
      }
    }
  }
  std::vector<EvalRecord> kept;
  for (const auto& r : records)
    if (r) kept.push_back(*r);
  write_atomic(records_path, records_text(kept));

  RunManifest manifest;
  manifest.config_hash = hash;
  manifest.config_json = config.canonical_json;
  manifest.base_dir = fs::absolute(config.base_dir);
  manifest.output_dir = out;
  for (const auto& dp : p.data.plans) manifest.skipped_constant_segments += dp.skipped_constant;
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < p.tasks.size(); ++i) {
    TaskState state;
    state.id = p.tasks[i].id;
    if (records[i]) {
      if (auto it = previous.find(state.id); it != previous.end()) state = it->second;
      state.status = TaskStatus::Done;
      state.error_class.clear();
      state.error_message.clear();
    } else {
      pending.push_back(i);
    }
    manifest.tasks.push_back(std::move(state));
  }
  // Written up front so an interrupted run can still be resumed.
  write_atomic(manifest_path, manifest_json(manifest).dump(2) + "\n");

  ModelClient client(static_cast<std::ptrdiff_t>(config.parallelism));
  std::atomic<std::size_t> model_calls{0};
  std::atomic<std::size_t> next{0};
  std::mutex append_mutex;
  const TaskContext ctx{config, p, client, model_calls, out};

  const auto worker = [&] {
    for (;;) {
      const auto k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const auto i = pending[k];
      TaskState state;
      state.id = p.tasks[i].id;
      std::optional<EvalRecord> rec;
      try {
        rec = execute(ctx, p.tasks[i], state);
        state.status = TaskStatus::Done;
      } catch (const Error& e) {
        state.status = TaskStatus::Failed;
        state.error_class = std::string(to_string(e.code()));
        state.error_message = e.what();
      } catch (const std::exception& e) {
        state.status = TaskStatus::Failed;
        state.error_class = "Exception";
        state.error_message = e.what();
      }
      std::lock_guard lock(append_mutex);
      if (rec) {
        std::ofstream app(records_path, std::ios::binary | std::ios::app);
        app << to_json_line(*rec) << '\n';
        app.flush();
        records[i] = std::move(rec);
      }
      if (options.verbose || state.status == TaskStatus::Failed)
        log_line(state.id + ": " + std::string(to_string(state.status)) +
                 (state.error_message.empty() ? "" : " (" + state.error_message + ")"));
      manifest.tasks[i] = std::move(state);
    }
  };
  const auto n_workers = std::min<std::size_t>(config.parallelism, pending.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Rewrite the store in plan order so identical runs give identical files.
  std::vector<EvalRecord> all;
  for (const auto& r : records)
    if (r) all.push_back(*r);
  write_atomic(records_path, records_text(all));
  write_atomic(manifest_path, manifest_json(manifest).dump(2) + "\n");

  if (!all.empty()) {
    const std::vector<std::string> group_by{"ticker", "model_id", "mode", "noise"};
    const auto table = aggregate(all, group_by);
    for (auto f : {ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json}) emit_report(table, f, out);
    emit_arima_comparison(all, out);
  }

  manifest.executed = pending.size();
  manifest.model_calls = model_calls.load();
  return manifest;
}

RunManifest resume(const fs::path& manifest_path, const RunOptions& options) {
  const auto m = read_manifest(manifest_path);
  auto cfg = parse_config(m.config_json, m.base_dir);
  if (config_hash(cfg) != m.config_hash)
    throw Error(Errc::ConfigMismatch, "manifest config does not match its recorded hash");
  cfg.output_dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
  return run(cfg, options);
}

}  // namespace vista
