#include "vista/fetch.hpp"

#include <httplib.h>

#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "http_util.hpp"
#include "vista/error.hpp"

namespace vista {
namespace {

// One writer per cache key.
std::mutex& key_mutex(const std::string& key) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view body) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error(Errc::IoError, "failed to write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, std::string_view ticker,
                                 Date date_from, Date date_to) {
  return cache_dir / (std::string(ticker) + "_" + format_date(date_from) + "_" +
                      format_date(date_to) + ".csv");
}

PriceSeries fetch_remote(std::string_view ticker, Date date_from, Date date_to,
                         std::string_view endpoint, const FetchOptions& options) {
  const auto cached = cache_path(options.cache_dir, ticker, date_from, date_to);
  std::lock_guard lock(key_mutex(cached.string()));
  if (std::filesystem::exists(cached))
    return parse_csv(read_file(cached), ticker, date_from, date_to);

  const auto url = detail::split_url(endpoint);
  httplib::Client client(url.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  const httplib::Params params{{"ticker", std::string(ticker)},
                               {"from", format_date(date_from)},
                               {"to", format_date(date_to)}};
  const auto path = url.path.empty() ? std::string("/") : url.path;

  for (int attempt = 0;; ++attempt) {
    auto res = client.Get(path, params, httplib::Headers{});
    if (res) {
      if (res->status < 200 || res->status >= 300)
        throw Error(Errc::HttpStatus, "quote endpoint returned " + std::to_string(res->status),
                    res->body, res->status);
      auto series = parse_csv(res->body, ticker, date_from, date_to);
      write_file_atomic(cached, res->body);
      return series;
    }
    if (attempt >= options.max_retries)
      throw Error(Errc::NetworkError, "GET " + std::string(endpoint) + " failed: " +
                                          httplib::to_string(res.error()));
    std::this_thread::sleep_for(detail::backoff_delay(options.backoff_base, attempt));
  }
}

}  // namespace vista
