#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <thread>

#include "vista/error.hpp"

namespace vista::detail {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix without trailing slash, may be empty
};

inline UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw Error(Errc::InvalidArgument, "URL lacks a scheme: " + std::string(url));
  const auto path_begin = url.find('/', scheme_end + 3);
  UrlParts parts;
  parts.origin = std::string(url.substr(0, path_begin));
  if (path_begin != std::string_view::npos) {
    parts.path = std::string(url.substr(path_begin));
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
  }
  return parts;
}

inline std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int retry_index) {
  return base * (1LL << retry_index);
}

}  // namespace vista::detail
