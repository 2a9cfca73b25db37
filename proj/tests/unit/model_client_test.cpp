#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <mutex>

#include "http_fixture.hpp"
#include "vista/error.hpp"
#include "vista/model_client.hpp"

using namespace vista;
using json = nlohmann::json;
using namespace std::chrono_literals;

namespace {

PromptBundle text_bundle(std::vector<double> input = {0.1, 0.3, 0.5}, std::size_t h = 5) {
  PromptBundle b;
  b.mode = PromptMode::TextOnly;
  b.text = "hello";
  b.input = std::move(input);
  b.horizon = h;
  return b;
}

PromptBundle image_bundle() {
  auto b = text_bundle();
  b.mode = PromptMode::Multimodal;
  b.image = std::vector<std::uint8_t>{0x89, 'P', 'N', 'G'};
  return b;
}

std::string chat_reply(const std::string& text) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}}.dump();
}

// Scripted chat-completions server: replies with the queued statuses in order
// (200 bodies carry `reply`) and records every request body.
struct RecordingServer {
  oracle::LocalServer srv;
  std::mutex mu;
  std::vector<int> script;
  std::vector<std::string> bodies;
  std::vector<std::string> auth;
  std::string reply = "[0.1, 0.2, 0.3, 0.4, 0.5]";

  explicit RecordingServer(std::vector<int> statuses) : script(std::move(statuses)) {
    srv.server().Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu);
      const auto i = bodies.size();
      bodies.push_back(req.body);
      auth.push_back(req.get_header_value("Authorization"));
      res.status = i < script.size() ? script[i] : 200;
      if (res.status == 200)
        res.set_content(chat_reply(reply), "application/json");
      else
        res.set_content("{\"error\":\"scripted\"}", "application/json");
    });
    srv.start();
  }

  ModelEndpoint endpoint() const {
    ModelEndpoint ep;
    ep.base_url = srv.url() + "/v1";
    ep.model_id = "recorder";
    ep.api_key = "sk-test";
    ep.backoff_base = 1ms;
    ep.timeout = 5s;
    return ep;
  }
};

std::size_t image_parts(const std::string& body) {
  const auto doc = json::parse(body);
  std::size_t n = 0;
  for (const auto& msg : doc.at("messages"))
    for (const auto& part : msg.at("content"))
      if (part.at("type") == "image_url") ++n;
  return n;
}

}  // namespace

TEST(Endpoint, Defaults) {
  ModelEndpoint ep;
  EXPECT_EQ(ep.temperature, 0.0);
  EXPECT_EQ(ep.max_tokens, 512);
  EXPECT_EQ(ep.timeout, 120s);
  EXPECT_EQ(ep.max_retries, 3);
}

TEST(Mock, EchoReturnsFixedText) {
  const auto ep = mock_model(MockBehavior::Echo, "[0.1, 0.2, 0.3, 0.4, 0.5]");
  const auto r = complete(ep, text_bundle());
  EXPECT_EQ(r.text, "[0.1, 0.2, 0.3, 0.4, 0.5]");
  EXPECT_EQ(r.attempt_count, 1);
  EXPECT_EQ(r.endpoint, "mock-echo");
  EXPECT_EQ(ep.mock->calls(), 1u);
}

TEST(Mock, LastValueRepeatsFinalInput) {
  const auto r = complete(mock_model(MockBehavior::LastValue), text_bundle({0.2, 0.9, 0.5}, 5));
  EXPECT_EQ(r.text, "[0.5000, 0.5000, 0.5000, 0.5000, 0.5000]");
}

TEST(Mock, LinearTrendExtendsExactRamp) {
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i) / 99.0;
  const auto r = complete(mock_model(MockBehavior::LinearTrend), text_bundle(ramp, 2));
  const auto f = parse_forecast(r.text, 2);
  EXPECT_NEAR(f.values[0], 100.0 / 99.0, 1e-9);
  EXPECT_NEAR(f.values[1], 101.0 / 99.0, 1e-9);
}

TEST(Mock, FailAlwaysNetworkError) {
  const auto ep = mock_model(MockBehavior::Fail);
  for (int i = 0; i < 3; ++i) {
    try {
      complete(ep, text_bundle());
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::NetworkError);
    }
  }
  EXPECT_EQ(ep.mock->calls(), 3u);
}

TEST(Http, RetriesServerErrorsThenSucceeds) {
  RecordingServer rec({500, 500, 200});
  const auto r = complete(rec.endpoint(), text_bundle());
  EXPECT_EQ(r.attempt_count, 3);
  EXPECT_EQ(r.text, "[0.1, 0.2, 0.3, 0.4, 0.5]");
  EXPECT_EQ(r.endpoint, "recorder");
  EXPECT_EQ(rec.bodies.size(), 3u);
  EXPECT_EQ(rec.auth[0], "Bearer sk-test");
}

TEST(Http, UnauthorizedFailsFast) {
  for (int status : {401, 403}) {
    RecordingServer rec({status});
    try {
      complete(rec.endpoint(), text_bundle());
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::AuthError);
      EXPECT_EQ(e.status(), status);
    }
    EXPECT_EQ(rec.bodies.size(), 1u);
  }
}

TEST(Http, RateLimitSurfacesAfterRetries) {
  RecordingServer rec({429, 429, 429, 429, 429});
  try {
    complete(rec.endpoint(), text_bundle());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RateLimited);
  }
  EXPECT_EQ(rec.bodies.size(), 4u);  // max_retries + 1
}

TEST(Http, EmptyContentIsEmptyResponse) {
  RecordingServer rec({200});
  rec.reply = "";
  try {
    complete(rec.endpoint(), text_bundle());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyResponse);
  }
}

TEST(Http, TextOnlyHasNoImagePart) {
  RecordingServer rec({200});
  complete(rec.endpoint(), text_bundle());
  ASSERT_EQ(rec.bodies.size(), 1u);
  EXPECT_EQ(image_parts(rec.bodies[0]), 0u);
}

TEST(Http, MultimodalHasExactlyOneImagePart) {
  RecordingServer rec({200});
  complete(rec.endpoint(), image_bundle());
  ASSERT_EQ(rec.bodies.size(), 1u);
  EXPECT_EQ(image_parts(rec.bodies[0]), 1u);
  const auto doc = json::parse(rec.bodies[0]);
  const auto& content = doc["messages"][0]["content"];
  EXPECT_EQ(content[0]["type"], "text");
  EXPECT_EQ(content[0]["text"], "hello");
  EXPECT_EQ(content[1]["image_url"]["url"], "data:image/png;base64,iVBORw==");
}

TEST(Http, TemperatureIsForwarded) {
  RecordingServer rec({200, 200});
  auto ep = rec.endpoint();
  complete(ep, text_bundle());
  ep.temperature = 0.7;
  complete(ep, text_bundle());
  EXPECT_EQ(json::parse(rec.bodies[0]).at("temperature").get<double>(), 0.0);
  EXPECT_EQ(json::parse(rec.bodies[1]).at("temperature").get<double>(), 0.7);
  EXPECT_EQ(json::parse(rec.bodies[0]).at("model"), "recorder");
  EXPECT_EQ(json::parse(rec.bodies[0]).at("max_tokens"), 512);
}

TEST(Http, RefusedConnectionIsNetworkError) {
  int port = 0;
  {
    oracle::LocalServer srv;
    srv.start();
    port = std::stoi(srv.url().substr(srv.url().rfind(':') + 1));
  }
  ModelEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.model_id = "gone";
  ep.backoff_base = 1ms;
  ep.max_retries = 1;
  try {
    complete(ep, text_bundle());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NetworkError);
  }
}

TEST(Http, ClientCapsConcurrency) {
  oracle::LocalServer srv;
  std::atomic<int> in_flight{0}, peak{0};
  srv.server().new_task_queue = [] { return new httplib::ThreadPool(8); };
  srv.server().Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    const int now = ++in_flight;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(30ms);
    --in_flight;
    res.set_content(chat_reply("[1]"), "application/json");
  });
  srv.start();
  ModelEndpoint ep;
  ep.base_url = srv.url();
  ep.model_id = "cap";
  ModelClient client(2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { client.complete(ep, text_bundle()); });
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}

TEST(Backoff, ScheduleDoublesAndNeverDecreases) {
  const auto s = backoff_schedule(1000ms, 3);
  EXPECT_EQ(s, (std::vector<std::chrono::milliseconds>{1000ms, 2000ms, 4000ms}));
  const auto longer = backoff_schedule(250ms, 8);
  for (std::size_t i = 1; i < longer.size(); ++i) EXPECT_GE(longer[i], longer[i - 1]);
}

TEST(Request, NegativeTemperatureRejected) {
  ModelEndpoint ep;
  ep.temperature = -0.1;
  try {
    build_request_body(ep, text_bundle());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
  }
}

TEST(Request, Base64Vectors) {
  auto enc = [](std::string s) {
    return base64_encode(std::vector<std::uint8_t>(s.begin(), s.end()));
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Env, ApiKeyComesFromEnvironment) {
  ::setenv(kApiKeyEnv, "from-env", 1);
  EXPECT_EQ(api_key_from_env(), "from-env");
  ::unsetenv(kApiKeyEnv);
  EXPECT_EQ(api_key_from_env(), "");
}
