#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vista/charting.hpp"
#include "vista/data.hpp"

namespace vista {

enum class PromptMode { TextOnly, Multimodal, MultimodalCoT };

/// "text_only", "multimodal", "cot".
std::string_view to_string(PromptMode mode) noexcept;
PromptMode parse_prompt_mode(std::string_view name);
constexpr bool requires_image(PromptMode mode) noexcept { return mode != PromptMode::TextOnly; }

struct PromptBundle {
  PromptMode mode = PromptMode::TextOnly;
  std::string text;
  std::optional<std::vector<std::uint8_t>> image;  ///< PNG bytes
  std::string segment_ref;
  // Segment context carried for in-process models; never sent over the wire.
  std::size_t horizon = 0;
  std::vector<double> input;
};

enum class ParseStrategy { BracketList, TrailingNumbers };
std::string_view to_string(ParseStrategy strategy) noexcept;

struct Forecast {
  std::vector<double> values;
  std::string raw_response;
  ParseStrategy parse_strategy = ParseStrategy::BracketList;
};

inline constexpr int kDefaultDecimals = 4;

/// "[v1, v2, ..., vn]" with fixed `decimals` places.
std::string format_values(std::span<const double> values, int decimals = kDefaultDecimals);

/// Raw template text with <PRICE_LENGTH>, <PRICE_VALUES>, <PREDICTION_INTERVAL> placeholders.
std::string_view prompt_template(PromptMode mode) noexcept;

/// Replaces every placeholder occurrence; all other bytes are preserved.
std::string fill_template(std::string_view tmpl, std::size_t price_length,
                          std::string_view price_values, std::size_t prediction_interval);

PromptBundle build_prompt(PromptMode mode, const ForecastSegment& segment,
                          const std::optional<ChartImage>& image, int decimals = kDefaultDecimals);

/// Extracts h forecast values from free-form model text: the last bracketed list
/// holding >= h numbers (first h taken), else the last h standalone numbers.
/// Throws Error(NoForecastFound) with the raw text as detail.
Forecast parse_forecast(std::string_view raw, std::size_t horizon);

}  // namespace vista
