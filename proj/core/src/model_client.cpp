#include "vista/model_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <numeric>
#include <thread>

#include "http_util.hpp"
#include "vista/error.hpp"

namespace vista {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string extract_content(const std::string& body) {
  const auto doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::EmptyResponse, "response is not JSON", body);
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty())
    throw Error(Errc::EmptyResponse, "response has no choices", body);
  const auto& message = (*choices)[0].value("message", json::object());
  const auto content = message.find("content");
  std::string text;
  if (content != message.end()) {
    if (content->is_string()) {
      text = content->get<std::string>();
    } else if (content->is_array()) {
      for (const auto& part : *content)
        if (part.value("type", "") == "text") text += part.value("text", "");
    }
  }
  if (text.empty()) throw Error(Errc::EmptyResponse, "assistant message is empty", body);
  return text;
}

}  // namespace

std::string MockModel::reply(const PromptBundle& bundle) const {
  const auto h = bundle.horizon;
  switch (behavior_) {
    case MockBehavior::Echo:
      return echo_;
    case MockBehavior::Fail:
      throw Error(Errc::NetworkError, "mock endpoint configured to fail");
    case MockBehavior::LastValue: {
      if (bundle.input.empty()) throw Error(Errc::InvalidArgument, "bundle carries no input");
      const std::vector<double> out(h, bundle.input.back());
      return format_values(out);
    }
    case MockBehavior::LinearTrend: {
      const auto n = bundle.input.size();
      if (n < 2) throw Error(Errc::InvalidArgument, "bundle carries fewer than 2 inputs");
      const double x_mean = static_cast<double>(n - 1) / 2.0;
      const double y_mean = std::accumulate(bundle.input.begin(), bundle.input.end(), 0.0) /
                            static_cast<double>(n);
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - x_mean;
        sxy += dx * (bundle.input[i] - y_mean);
        sxx += dx * dx;
      }
      const double slope = sxy / sxx;
      std::vector<double> out(h);
      for (std::size_t k = 0; k < h; ++k)
        out[k] = y_mean + slope * (static_cast<double>(n + k) - x_mean);
      return format_values(out, 12);
    }
  }
  return {};
}

ModelEndpoint mock_model(MockBehavior behavior, std::string echo) {
  ModelEndpoint ep;
  switch (behavior) {
    case MockBehavior::LastValue: ep.model_id = "mock-last-value"; break;
    case MockBehavior::LinearTrend: ep.model_id = "mock-linear-trend"; break;
    case MockBehavior::Echo: ep.model_id = "mock-echo"; break;
    case MockBehavior::Fail: ep.model_id = "mock-fail"; break;
  }
  ep.base_url = "mock://" + ep.model_id;
  ep.mock = std::make_shared<MockModel>(behavior, std::move(echo));
  return ep;
}

std::string api_key_from_env() {
  const char* key = std::getenv(kApiKeyEnv);
  return key ? std::string(key) : std::string();
}

std::vector<std::chrono::milliseconds> backoff_schedule(std::chrono::milliseconds base,
                                                        int max_retries) {
  std::vector<std::chrono::milliseconds> out;
  for (int k = 0; k < max_retries; ++k) out.push_back(detail::backoff_delay(base, k));
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const auto rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    if (rest == 2) v |= std::uint32_t{bytes[i + 1]} << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string build_request_body(const ModelEndpoint& endpoint, const PromptBundle& bundle) {
  if (endpoint.temperature < 0.0) throw Error(Errc::InvalidArgument, "temperature must be >= 0");
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", bundle.text}});
  if (bundle.image) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url", {{"url", "data:image/png;base64," + base64_encode(*bundle.image)}}}});
  }
  json body = {
      {"model", endpoint.model_id},
      {"temperature", endpoint.temperature},
      {"max_tokens", endpoint.max_tokens},
      {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})},
  };
  return body.dump();
}

ModelClient::ModelClient(std::ptrdiff_t max_concurrent)
    : slots_(std::clamp<std::ptrdiff_t>(max_concurrent, 1, 1024)) {}

ModelResponse ModelClient::complete(const ModelEndpoint& endpoint, const PromptBundle& bundle) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return vista::complete(endpoint, bundle);
}

ModelResponse complete(const ModelEndpoint& endpoint, const PromptBundle& bundle) {
  if (requires_image(bundle.mode) != bundle.image.has_value())
    throw Error(Errc::InvalidArgument, "bundle image does not match its mode");

  const auto started = Clock::now();
  ModelResponse response;
  response.endpoint = endpoint.model_id;

  if (endpoint.mock) {
    endpoint.mock->record_call();
    response.attempt_count = 1;
    response.text = endpoint.mock->reply(bundle);
    response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
    return response;
  }

  const auto url = detail::split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint.timeout);
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  const auto body = build_request_body(endpoint, bundle);
  const auto path = url.path + "/chat/completions";

  for (int attempt = 0;; ++attempt) {
    response.attempt_count = attempt + 1;
    auto res = client.Post(path, headers, body, "application/json");
    const bool last = attempt >= endpoint.max_retries;
    if (res) {
      const int status = res->status;
      if (status >= 200 && status < 300) {
        response.text = extract_content(res->body);
        response.latency =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
        return response;
      }
      if (status == 401 || status == 403)
        throw Error(Errc::AuthError, "endpoint rejected credentials", res->body, status);
      const bool retryable = status == 429 || status >= 500;
      if (!retryable || last) {
        const auto code = status == 429 ? Errc::RateLimited : Errc::HttpStatus;
        throw Error(code, "endpoint returned " + std::to_string(status) + " after " +
                              std::to_string(attempt + 1) + " attempt(s)",
                    res->body, status);
      }
    } else if (last) {
      throw Error(Errc::NetworkError, "POST " + endpoint.base_url + " failed after " +
                                          std::to_string(attempt + 1) + " attempt(s): " +
                                          httplib::to_string(res.error()));
    }
    std::this_thread::sleep_for(detail::backoff_delay(endpoint.backoff_base, attempt));
  }
}

}  // namespace vista
