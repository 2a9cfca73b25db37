#include "vista/config.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "vista/error.hpp"

namespace vista {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::ConfigError, why); }

ModelEndpoint parse_endpoint(const json& j) {
  if (j.contains("api_key"))
    bad("endpoint api keys are read from VISTA_API_KEY, not from config files");
  ModelEndpoint ep;
  if (j.contains("mock")) {
    const auto kind = j.at("mock").get<std::string>();
    if (kind == "last_value") ep = mock_model(MockBehavior::LastValue);
    else if (kind == "linear_trend") ep = mock_model(MockBehavior::LinearTrend);
    else if (kind == "fail") ep = mock_model(MockBehavior::Fail);
    else if (kind == "echo") ep = mock_model(MockBehavior::Echo, j.value("echo", ""));
    else bad("unknown mock behavior '" + kind + "'");
    ep.model_id = j.value("model_id", ep.model_id);
    return ep;
  }
  ep.base_url = j.at("base_url").get<std::string>();
  ep.model_id = j.at("model_id").get<std::string>();
  ep.temperature = j.value("temperature", 0.0);
  ep.max_tokens = j.value("max_tokens", 512);
  ep.timeout = std::chrono::seconds(j.value("timeout_s", 120));
  ep.max_retries = j.value("max_retries", 3);
  ep.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", 1000));
  ep.api_key = api_key_from_env();
  if (ep.temperature < 0.0) bad("temperature must be >= 0");
  if (ep.max_retries < 0) bad("max_retries must be >= 0");
  return ep;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const auto doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) bad("config is not a JSON object");
  if (doc.contains("api_key")) bad("api keys are read from VISTA_API_KEY, not from config files");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.canonical_json = doc.dump();
  try {
    for (const auto& d : doc.at("datasets")) {
      DatasetConfig ds;
      ds.ticker = d.at("ticker").get<std::string>();
      if (d.contains("csv")) ds.csv = base_dir / d.at("csv").get<std::string>();
      ds.remote_endpoint = d.value("remote", "");
      if (ds.csv.empty() && ds.remote_endpoint.empty())
        bad("dataset '" + ds.ticker + "' needs a csv path or a remote endpoint");
      ds.from = parse_date(d.value("from", "2014-01-01"));
      ds.to = parse_date(d.value("to", "2020-01-01"));
      cfg.datasets.push_back(std::move(ds));
    }
    cfg.input_length = doc.value("T", std::size_t{100});
    cfg.horizon = doc.value("h", std::size_t{5});
    cfg.stride = doc.value("stride", cfg.horizon);
    for (const auto& m : doc.value("modes", json::array()))
      cfg.modes.push_back(parse_prompt_mode(m.get<std::string>()));
    for (const auto& e : doc.value("endpoints", json::array())) cfg.endpoints.push_back(parse_endpoint(e));

    if (doc.contains("noise_coefficients")) {
      const auto& nc = doc.at("noise_coefficients");
      if (nc.is_string()) {
        if (nc.get<std::string>() != "ablation") bad("noise preset must be \"ablation\"");
        cfg.noise_coefficients.assign(kAblationDensities.begin(), kAblationDensities.end());
      } else {
        cfg.noise_coefficients = nc.get<std::vector<double>>();
      }
    }
    cfg.salt_ratio = doc.value("salt_ratio", 0.2);
    if (doc.contains("arima")) {
      const auto& a = doc.at("arima");
      cfg.arima.enabled = a.value("enabled", false);
      if (a.contains("grid")) {
        cfg.arima.grid.clear();
        for (const auto& o : a.at("grid"))
          cfg.arima.grid.push_back({o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<int>()});
      }
    }
    cfg.seed = doc.value("seed", std::uint64_t{42});
    cfg.parallelism = doc.value("parallelism", std::size_t{4});
    cfg.output_dir = base_dir / doc.value("output_dir", std::string("out"));
    cfg.cache_dir = base_dir / doc.value("cache_dir", std::string("cache"));
    if (doc.contains("chart")) {
      cfg.chart_width = doc.at("chart").value("width", kDefaultChartWidth);
      cfg.chart_height = doc.at("chart").value("height", kDefaultChartHeight);
    }
    if (doc.contains("prompt")) cfg.decimals = doc.at("prompt").value("decimals", kDefaultDecimals);
    const auto norm = doc.value("normalization", std::string("input_window"));
    if (norm == "input_window") cfg.normalization = NormalizationScope::InputWindow;
    else if (norm == "whole_series") cfg.normalization = NormalizationScope::WholeSeries;
    else bad("normalization must be input_window or whole_series");
    if (doc.contains("metrics")) {
      const auto space = doc.at("metrics").value("space", std::string("normalized"));
      if (space == "normalized") cfg.metric_space = MetricSpace::Normalized;
      else if (space == "raw") cfg.metric_space = MetricSpace::Raw;
      else bad("metrics.space must be normalized or raw");
    }
  } catch (const json::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    bad(e.what());
  }

  if (cfg.datasets.empty()) bad("config lists no datasets");
  if (cfg.input_length < 2 || cfg.horizon < 1 || cfg.stride < 1) bad("require T >= 2, h >= 1, stride >= 1");
  for (double n : cfg.noise_coefficients)
    if (!(n >= 0.0 && n <= 0.5)) bad("noise coefficients must lie in [0, 0.5]");
  if (!(cfg.salt_ratio >= 0.0 && cfg.salt_ratio <= 1.0)) bad("salt_ratio must lie in [0, 1]");
  if (cfg.modes.empty() && !cfg.arima.enabled) bad("config needs prompt modes or arima.enabled");
  if (!cfg.modes.empty() && cfg.endpoints.empty()) bad("prompt modes need at least one endpoint");
  if (cfg.arima.enabled && cfg.arima.grid.empty()) bad("arima grid is empty");
  for (const auto& o : cfg.arima.grid)
    if (o.p < 0 || o.d < 0 || o.q < 0 || o.p > arima::kMaxGridOrder || o.d > arima::kMaxGridOrder ||
        o.q > arima::kMaxGridOrder)
      bad("arima orders must lie in [0, 2]");
  if (cfg.parallelism < 1) cfg.parallelism = 1;
  if (cfg.decimals < 1 || cfg.decimals > 17) bad("prompt.decimals must be in [1, 17]");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.canonical_json) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vista
