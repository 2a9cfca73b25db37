#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vista/arima.hpp"
#include "vista/charting.hpp"
#include "vista/data.hpp"
#include "vista/model_client.hpp"
#include "vista/prompting.hpp"

namespace vista {

struct DatasetConfig {
  std::string ticker;
  std::filesystem::path csv;    ///< local CSV, resolved against the config directory
  std::string remote_endpoint;  ///< when set, data comes from fetch_remote instead
  Date from;
  Date to;
};

enum class MetricSpace { Normalized, Raw };

struct ArimaConfig {
  bool enabled = false;
  std::vector<arima::Order> grid = arima::default_grid();
};

/// Experiment description read from JSON. Keys: datasets, T, h, stride, modes,
/// endpoints, noise_coefficients ("ablation" selects the 11-level preset),
/// salt_ratio, arima{enabled, grid}, seed, parallelism, output_dir, cache_dir,
/// chart{width, height}, prompt{decimals}, normalization, metrics{space}.
struct ExperimentConfig {
  std::vector<DatasetConfig> datasets;
  std::size_t input_length = 100;
  std::size_t horizon = 5;
  std::size_t stride = 5;
  std::vector<PromptMode> modes;
  std::vector<ModelEndpoint> endpoints;
  std::vector<double> noise_coefficients;
  double salt_ratio = 0.2;
  ArimaConfig arima;
  std::uint64_t seed = 42;
  std::size_t parallelism = 4;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir = "cache";
  std::uint32_t chart_width = kDefaultChartWidth;
  std::uint32_t chart_height = kDefaultChartHeight;
  int decimals = kDefaultDecimals;
  NormalizationScope normalization = NormalizationScope::InputWindow;
  MetricSpace metric_space = MetricSpace::Normalized;

  std::filesystem::path base_dir;  ///< directory relative paths resolve against
  std::string canonical_json;      ///< key-sorted source document, the hash input
};

/// Parses and validates a config document. Throws Error(ConfigError).
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Hex FNV-1a 64 digest of the canonical (key-sorted) config document.
std::string config_hash(const ExperimentConfig& config);

}  // namespace vista
