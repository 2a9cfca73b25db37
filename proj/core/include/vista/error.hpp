#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vista {

enum class Errc {
  // data
  MissingColumn,
  EmptyRange,
  CorruptFile,
  ConstantSeries,
  TooShort,
  NonFinite,
  InvalidArgument,
  // network / model client
  NetworkError,
  HttpStatus,
  AuthError,
  RateLimited,
  EmptyResponse,
  // charting / prompting
  BadDimensions,
  MissingImage,
  UnexpectedImage,
  NoForecastFound,
  // arima
  AllFitsFailed,
  // metrics / report
  LengthMismatch,
  ZeroBaseline,
  EmptyInput,
  IoError,
  // runner
  ConfigError,
  ConfigMismatch,
  CorruptManifest,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library. The code identifies the error class
/// (persisted in manifests); `detail()` carries context such as the raw model
/// response for NoForecastFound or the HTTP status for HttpStatus.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string detail = {}, int status = 0);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  int status() const noexcept { return status_; }

 private:
  Errc code_;
  std::string detail_;
  int status_;
};

}  // namespace vista
