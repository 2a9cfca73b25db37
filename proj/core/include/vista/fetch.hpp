#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>

#include "vista/data.hpp"

namespace vista {

struct FetchOptions {
  std::filesystem::path cache_dir = "cache";
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::seconds timeout{30};
};

/// Path of the cached CSV body for (ticker, range) under `cache_dir`.
std::filesystem::path cache_path(const std::filesystem::path& cache_dir, std::string_view ticker,
                                 Date date_from, Date date_to);

/// GETs `<endpoint>?ticker=..&from=..&to=..` and parses the body with parse_csv.
/// Successful bodies are cached; a cache hit issues no request.
PriceSeries fetch_remote(std::string_view ticker, Date date_from, Date date_to,
                         std::string_view endpoint, const FetchOptions& options = {});

}  // namespace vista
