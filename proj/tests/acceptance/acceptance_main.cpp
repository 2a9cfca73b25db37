// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-vista-cli]

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "vista/arima.hpp"
#include "vista/charting.hpp"
#include "vista/data.hpp"
#include "vista/error.hpp"
#include "vista/metrics.hpp"
#include "vista/prompting.hpp"
#include "vista/report.hpp"
#include "vista/runner.hpp"
#include "vista/stockwell.hpp"

namespace {

using namespace vista;
using json = nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double rel_err(double got, double want) {
  return want == 0.0 ? std::fabs(got) : std::fabs(got - want) / std::fabs(want);
}

// 1 -------------------------------------------------------------------------
Outcome metric_oracle() {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(-0.25, 1.25);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> f(5), y(5);
    for (auto& v : f) v = u(rng);
    for (auto& v : y) v = u(rng);
    const auto m = score(f, y);
    const auto o = oracle::metrics(f, y);
    worst = std::max({worst, rel_err(m.mse, o.mse), rel_err(m.rmse, o.rmse), rel_err(m.mae, o.mae),
                      rel_err(m.mape, o.mape)});
  }
  return {worst <= 1e-12, "1000 pairs, max relative error " + fmt("%.2e", worst) + " (tol 1e-12)"};
}

// 2 -------------------------------------------------------------------------
Outcome quoted_arithmetic() {
  struct Quote {
    double baseline, treated, quoted;
  };
  const Quote quotes[] = {{0.0177, 0.0018, 89.83}, {0.0413, 0.0046, 88.9}, {0.0459, 0.0095, 79.3}, {0.0326, 0.0164, 49.7}};
  bool ok = true;
  std::string detail;
  for (const auto& q : quotes) {
    const double got = improvement_pct(q.baseline, q.treated);
    ok = ok && std::fabs(got - q.quoted) <= 0.05;
    detail += fmt("%.2f", got) + " vs " + fmt("%.2f", q.quoted) + "; ";
  }
  return {ok, detail + "tol 0.05 pp"};
}

// 3 -------------------------------------------------------------------------
Outcome prompt_bytes() {
  ForecastSegment seg;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) seg.input.push_back(u(rng));
  seg.truth.assign(5, 0.5);
  ChartImage chart = render_line_chart(seg.input);
  std::size_t mismatches = 0;
  std::string detail;
  for (auto mode : {PromptMode::TextOnly, PromptMode::Multimodal, PromptMode::MultimodalCoT}) {
    std::string expected = slurp(oracle::source_path("templates/" + std::string(to_string(mode)) + ".txt"));
    const std::pair<std::string, std::string> subs[] = {
        {"<PRICE_LENGTH>", "100"}, {"<PRICE_VALUES>", format_values(seg.input)}, {"<PREDICTION_INTERVAL>", "5"}};
    for (const auto& [from, to] : subs)
      for (std::size_t pos = 0; (pos = expected.find(from, pos)) != std::string::npos; pos += to.size())
        expected.replace(pos, from.size(), to);
    const auto img = requires_image(mode) ? std::optional<ChartImage>(chart) : std::nullopt;
    const auto got = build_prompt(mode, seg, img).text;
    if (got != expected) ++mismatches;
    detail += std::string(to_string(mode)) + (got == expected ? " identical" : " DIFFERS") + "; ";
  }
  return {mismatches == 0, detail + "T=100 h=5"};
}

// 4 -------------------------------------------------------------------------
Outcome parser_corpus() {
  const auto dir = oracle::source_path("tests/fixtures/responses");
  const auto exp = json::parse(slurp(dir + "/expectations.json"));
  std::size_t matched = 0;
  for (const auto& [file, e] : exp.items()) {
    const auto raw = slurp(dir + "/" + file);
    const auto h = e.at("h").get<std::size_t>();
    try {
      const auto f = parse_forecast(raw, h);
      if (!e.contains("error") && f.values == e.at("values").get<std::vector<double>>() &&
          std::string(to_string(f.parse_strategy)) == e.at("strategy").get<std::string>())
        ++matched;
    } catch (const Error& err) {
      if (e.contains("error") && err.code() == Errc::NoForecastFound) ++matched;
    }
  }
  std::mt19937_64 rng(4);
  std::size_t crashes = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s(rng() % 96, '\0');
    for (auto& c : s) c = (rng() % 3 == 0) ? static_cast<char>(rng() & 0xff) : "0123456789.,-$[] eE\nabc"[rng() % 23];
    try {
      const auto f = parse_forecast(s, 1 + rng() % 5);
      for (double v : f.values)
        if (!std::isfinite(v)) ++crashes;
    } catch (const Error& err) {
      if (err.code() != Errc::NoForecastFound) ++crashes;
    } catch (...) {
      ++crashes;
    }
  }
  const bool ok = exp.size() >= 12 && matched == exp.size() && crashes == 0;
  return {ok, std::to_string(matched) + "/" + std::to_string(exp.size()) + " fixtures match; 10000 fuzz inputs, " +
                  std::to_string(crashes) + " failures"};
}

// 5 -------------------------------------------------------------------------
Outcome arima_recovery() {
  const auto ar = oracle::simulate_arma(500, 0.0, {0.7}, {}, 1.0, 42);
  const double phi = arima::fit_css(ar, {1, 0, 0}).phi.at(0);
  arima::Fit f;
  f.order = {1, 0, 0};
  f.phi = {0.5};
  const std::vector<double> last{0.2, 1.0};
  const auto fc = arima::forecast(f, last, 3);
  const bool fc_ok = fc == std::vector<double>{0.5, 0.25, 0.125};
  double worst = 0.0;
  const double phis[] = {0.6, -0.4, 0.3, 0.8, -0.6};
  const double thetas[] = {0.3, 0.4, -0.5, -0.2, 0.5};
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto x = oracle::simulate_arma(200, 0.1, {phis[k % 5]}, {thetas[(k / 5 + k) % 5]}, 1.0, 1000 + k);
    const auto fit = arima::fit_css(x, {1, 0, 1});
    const auto grid = oracle::brute_force_arma11(x);
    worst = std::max({worst, std::fabs(fit.phi[0] - grid.phi), std::fabs(fit.theta[0] - grid.theta)});
  }
  const bool ok = std::fabs(phi - 0.7) <= 0.1 && fc_ok && worst <= 0.05;
  return {ok, "AR(1) phi=" + fmt("%.4f", phi) + " (tol 0.1); forecast " + (fc_ok ? "[0.5, 0.25, 0.125]" : "WRONG") +
                  "; 20 ARMA(1,1) max |coef - grid| " + fmt("%.4f", worst) + " (tol 0.05)"};
}

// 6 -------------------------------------------------------------------------
Outcome stockwell_identity() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> x(128);
    for (auto& v : x) v = g(rng);
    const auto H = oracle::dft_normalized(x);
    const auto s = s_transform(x);
    for (std::size_t n = 0; n < s.n_freq; ++n) {
      std::complex<double> mean = 0;
      for (std::size_t j = 0; j < 128; ++j) mean += s.at(n, j);
      mean /= 128.0;
      worst = std::max(worst, std::abs(mean - H[n]) / std::max(std::abs(H[n]), 1e-300));
    }
  }
  // Single tone at bin 8 of 128 samples.
  const std::size_t n0 = 8;
  std::vector<double> tone(128);
  for (std::size_t t = 0; t < 128; ++t) tone[t] = std::cos(2.0 * M_PI * static_cast<double>(n0 * t) / 128.0);
  const auto s = s_transform(tone);
  double total = 0.0, band = 0.0;
  for (std::size_t n = 0; n < s.n_freq; ++n)
    for (std::size_t j = 0; j < s.n_time; ++j) {
      const double e = s.magnitude(n, j) * s.magnitude(n, j);
      total += e;
      if (n + 1 >= n0 && n <= n0 + 1) band += e;
    }
  const double frac = band / total;
  const bool ok = worst <= 1e-9 && frac >= 0.95;
  return {ok, "time-average max rel error " + fmt("%.2e", worst) + " (tol 1e-9); tone at bin 8: " +
                  fmt("%.2f", 100 * frac) + "% of energy within +-1 bin (need >= 95%)"};
}

// 7 -------------------------------------------------------------------------
Outcome noise_exactness() {
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i) / 99.0;
  const auto clean = render_line_chart(ramp, 800, 400);
  std::size_t bad = 0;
  for (double d : kAblationDensities) {
    const NoiseSpec spec{d, 0.2, 42};
    const auto a = inject_salt_pepper(clean, spec);
    const auto b = inject_salt_pepper(clean, spec);
    const auto n = static_cast<std::size_t>(std::llround(d * 320000.0));
    const auto white = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
    if (oracle::changed_pixels(clean, a) != n || oracle::count_color(a, kSalt) != white ||
        oracle::count_color(a, kPepper) != n - white || a.pixels != b.pixels)
      ++bad;
  }
  return {bad == 0, std::to_string(kAblationDensities.size() - bad) + "/" + std::to_string(kAblationDensities.size()) +
                        " coefficients exact on 800x400, seed 42 repeatable"};
}

// 8 -------------------------------------------------------------------------
struct CliResult {
  int status = -1;
  json summary;
};

CliResult run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  r.status = pclose(pipe);
  const auto at = out.rfind("summary: ");
  if (at != std::string::npos) r.summary = json::parse(out.substr(at + 9, out.find('\n', at) - at - 9), nullptr, false);
  return r;
}

std::string projected(const fs::path& records, std::size_t& lines, bool& schema_ok) {
  std::istringstream in(slurp(records));
  std::string line, text;
  std::set<std::string> ids;
  lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    try {
      const auto rec = parse_record_line(line);
      schema_ok = schema_ok && ids.insert(rec.task_id).second && rec.forecast.size() == 5;
    } catch (const Error&) {
      schema_ok = false;
    }
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    j["timestamp"] = "";
    text += j.dump() + "\n";
  }
  return text;
}

Outcome end_to_end(const std::string& cli) {
  const auto dir = fs::temp_directory_path() / "vista_acceptance_e2e";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const json config = {{"datasets", json::array({{{"ticker", "FIX"}, {"csv", oracle::source_path("data/fixture_110.csv")},
                                                  {"from", "2014-01-01"}, {"to", "2020-01-01"}}})},
                       {"T", 100},
                       {"h", 5},
                       {"modes", json::array({"text_only", "multimodal", "cot"})},
                       {"endpoints", json::array({{{"mock", "last_value"}}})},
                       {"arima", {{"enabled", true}}},
                       {"seed", 42}};
  std::string records[2];
  std::size_t lines[2] = {0, 0};
  bool schema_ok = true, runs_ok = true;
  std::size_t resume_calls = 999;
  for (int k = 0; k < 2; ++k) {
    const auto sub = dir / ("run" + std::to_string(k));
    fs::create_directories(sub);
    auto doc = config;
    doc["output_dir"] = "out";
    std::ofstream(sub / "config.json") << doc.dump(2);
    if (!cli.empty()) {
      const auto r = run_cli(cli, "run --config \"" + (sub / "config.json").string() + "\" --strict");
      runs_ok = runs_ok && r.status == 0 && !r.summary.is_discarded() && r.summary.value("done", 0) == 8;
    } else {
      const auto m = run(load_config(sub / "config.json"));
      runs_ok = runs_ok && m.count(TaskStatus::Done) == 8;
    }
    records[k] = projected(sub / "out" / kRecordsFile, lines[k], schema_ok);
  }
  const auto manifest = dir / "run0" / "out" / kManifestFile;
  if (!cli.empty()) {
    const auto r = run_cli(cli, "resume --manifest \"" + manifest.string() + "\"");
    if (r.status == 0 && !r.summary.is_discarded()) resume_calls = r.summary.value("model_calls", std::size_t{999});
  } else {
    resume_calls = resume(manifest).model_calls;
  }
  std::size_t after = 0;
  const bool unchanged = projected(dir / "run0" / "out" / kRecordsFile, after, schema_ok) == records[0];
  const bool ok = runs_ok && schema_ok && lines[0] == 8 && records[0] == records[1] && resume_calls == 0 && unchanged;
  fs::remove_all(dir);
  return {ok, std::string(cli.empty() ? "library" : "CLI") + " runs " + (runs_ok ? "completed" : "FAILED") + "; " +
                  std::to_string(lines[0]) + " schema-valid records; runs " +
                  (records[0] == records[1] ? "identical" : "DIFFER") + "; resume made " + std::to_string(resume_calls) +
                  " model calls"};
}

// 9 -------------------------------------------------------------------------
Outcome normalization_properties() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> price(0.5, 5000.0);
  std::uniform_int_distribution<int> len(2, 300);
  std::size_t range_bad = 0, endpoint_bad = 0, roundtrip_bad = 0, count_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) v = price(rng);
    if (x[0] == x[1]) x[1] += 1.0;
    const auto ns = minmax_normalize(x);
    bool has0 = false, has1 = false;
    for (double v : ns.values) {
      if (v < 0.0 || v > 1.0) ++range_bad;
      has0 = has0 || v == 0.0;
      has1 = has1 || v == 1.0;
    }
    if (!has0 || !has1) ++endpoint_bad;
    const auto back = denormalize(ns, ns.values);
    for (std::size_t k = 0; k < x.size(); ++k)
      if (rel_err(back[k], x[k]) > 1e-12) {
        ++roundtrip_bad;
        break;
      }
  }
  std::uniform_int_distribution<std::size_t> nn(3, 400), tt(2, 120), hh(1, 10), ss(1, 12);
  for (int i = 0; i < 1000; ++i) {
    const auto T = tt(rng), h = hh(rng), stride = ss(rng);
    const auto n = std::max(nn(rng), T + h);
    if (segment_count(n, T, h, stride) != oracle::enumerate_segment_starts(n, T, h, stride).size()) ++count_bad;
  }
  const bool ok = range_bad + endpoint_bad + roundtrip_bad + count_bad == 0;
  return {ok, "1000 cases each: range violations " + std::to_string(range_bad) + ", endpoint misses " +
                  std::to_string(endpoint_bad) + ", round-trip > 1e-12 " + std::to_string(roundtrip_bad) +
                  ", count mismatches " + std::to_string(count_bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {1, "metric oracle equivalence", 1.0, metric_oracle},
      {2, "quoted improvement arithmetic", 1.0, quoted_arithmetic},
      {3, "prompt byte-exactness", 1.0, prompt_bytes},
      {4, "parser corpus and fuzz", 5.0, parser_corpus},
      {5, "ARIMA recovery", 30.0, arima_recovery},
      {6, "Stockwell identity and localization", 10.0, stockwell_identity},
      {7, "noise exactness", 5.0, noise_exactness},
      {8, "end-to-end determinism", 60.0, [&] { return end_to_end(cli); }},
      {9, "normalization properties", 5.0, normalization_properties},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  criterion %d  %-38s %s [%.3f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
