#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vista/config.hpp"
#include "vista/data.hpp"
#include "vista/prompting.hpp"

namespace vista {

/// One unit of work: a prompt sent to one endpoint (optionally with a noisy
/// chart), or an ARIMA baseline when `mode` is empty.
struct Task {
  std::string id;
  std::size_t dataset = 0;
  std::size_t segment = 0;
  std::optional<PromptMode> mode;
  std::size_t endpoint = 0;
  std::optional<double> noise;

  bool is_arima() const noexcept { return !mode.has_value(); }
};

struct LoadedData {
  std::vector<PriceSeries> series;
  std::vector<SegmentPlan> plans;
};

LoadedData load_datasets(const ExperimentConfig& config);

/// Ordered by (dataset, segment start, mode, endpoint, noise); ARIMA last per
/// segment. Noise levels apply only to image-bearing modes.
std::vector<Task> plan_tasks(const ExperimentConfig& config, std::span<const SegmentPlan> plans);

struct Plan {
  LoadedData data;
  std::vector<Task> tasks;
};
Plan plan(const ExperimentConfig& config);

enum class TaskStatus { Pending, Done, Failed };
std::string_view to_string(TaskStatus status) noexcept;

struct TaskState {
  std::string id;
  TaskStatus status = TaskStatus::Pending;
  std::string error_class;
  std::string error_message;
  std::string chart;   ///< paths relative to the output directory
  std::string prompt;
  std::string raw;
};

struct RunManifest {
  std::string config_hash;
  std::string config_json;
  std::filesystem::path base_dir;
  std::filesystem::path output_dir;
  std::vector<TaskState> tasks;
  // Counters for this invocation only; not persisted.
  std::size_t executed = 0;
  std::size_t model_calls = 0;
  std::size_t skipped_constant_segments = 0;

  std::size_t count(TaskStatus status) const;
};

struct RunOptions {
  bool verbose = false;
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kRecordsFile = "records.jsonl";

/// Executes every task not already recorded in `<output_dir>/records.jsonl`.
/// Task failures are recorded, never fatal. Refuses with ConfigMismatch when an
/// existing manifest was written for a different config.
RunManifest run(const ExperimentConfig& config, const RunOptions& options = {});

/// Continues the run described by a manifest; only pending/failed tasks execute.
RunManifest resume(const std::filesystem::path& manifest_path, const RunOptions& options = {});

RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace vista
