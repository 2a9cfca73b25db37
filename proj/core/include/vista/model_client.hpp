#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "vista/prompting.hpp"

namespace vista {

inline constexpr const char* kApiKeyEnv = "VISTA_API_KEY";

enum class MockBehavior { LastValue, LinearTrend, Echo, Fail };

/// Deterministic in-process stand-in for a chat-completion model.
class MockModel {
 public:
  explicit MockModel(MockBehavior behavior, std::string echo = {})
      : behavior_(behavior), echo_(std::move(echo)) {}

  MockBehavior behavior() const noexcept { return behavior_; }
  /// Reply text for a bundle; throws Error(NetworkError) for Fail.
  std::string reply(const PromptBundle& bundle) const;
  std::size_t calls() const noexcept { return calls_.load(); }
  void record_call() noexcept { calls_.fetch_add(1); }

 private:
  MockBehavior behavior_;
  std::string echo_;
  std::atomic<std::size_t> calls_{0};
};

struct ModelEndpoint {
  std::string base_url;
  std::string model_id;
  std::string api_key;  ///< filled from VISTA_API_KEY, never from config files
  double temperature = 0.0;
  int max_tokens = 512;
  std::chrono::seconds timeout{120};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::shared_ptr<MockModel> mock;  ///< set for in-process endpoints

  bool is_mock() const noexcept { return mock != nullptr; }
};

struct ModelResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  int attempt_count = 0;
  std::string endpoint;
};

ModelEndpoint mock_model(MockBehavior behavior, std::string echo = {});
std::string api_key_from_env();

/// Delays slept before retry k (k = 0..max_retries-1): base * 2^k.
std::vector<std::chrono::milliseconds> backoff_schedule(std::chrono::milliseconds base,
                                                        int max_retries);

/// OpenAI-compatible chat-completions request body. Image-bearing bundles add
/// one image_url part holding a base64 PNG data URL after the text part.
std::string build_request_body(const ModelEndpoint& endpoint, const PromptBundle& bundle);

std::string base64_encode(std::span<const std::uint8_t> bytes);

/// Shareable client; a semaphore caps the number of in-flight requests.
class ModelClient {
 public:
  explicit ModelClient(std::ptrdiff_t max_concurrent = 4);

  /// Retries timeouts, 429 and 5xx with exponential backoff; 401/403 fail fast.
  ModelResponse complete(const ModelEndpoint& endpoint, const PromptBundle& bundle);

 private:
  std::counting_semaphore<1024> slots_;
};

ModelResponse complete(const ModelEndpoint& endpoint, const PromptBundle& bundle);

}  // namespace vista
