#include "vista/error.hpp"

namespace vista {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::ConstantSeries: return "ConstantSeries";
    case Errc::TooShort: return "TooShort";
    case Errc::NonFinite: return "NonFinite";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NetworkError: return "NetworkError";
    case Errc::HttpStatus: return "HttpStatus";
    case Errc::AuthError: return "AuthError";
    case Errc::RateLimited: return "RateLimited";
    case Errc::EmptyResponse: return "EmptyResponse";
    case Errc::BadDimensions: return "BadDimensions";
    case Errc::MissingImage: return "MissingImage";
    case Errc::UnexpectedImage: return "UnexpectedImage";
    case Errc::NoForecastFound: return "NoForecastFound";
    case Errc::AllFitsFailed: return "AllFitsFailed";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroBaseline: return "ZeroBaseline";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::ConfigMismatch: return "ConfigMismatch";
    case Errc::CorruptManifest: return "CorruptManifest";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::string detail, int status)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)),
      status_(status) {}

}  // namespace vista
