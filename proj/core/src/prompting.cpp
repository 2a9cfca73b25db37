#include "vista/prompting.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "vista/error.hpp"

namespace vista {

namespace templates {
extern const std::string_view text_only;
extern const std::string_view multimodal;
extern const std::string_view cot;
}  // namespace templates

namespace {

struct NumberToken {
  double value;
  std::size_t begin;
  std::size_t end;
  bool glued;  // touches a letter, e.g. "day1" or "5th"
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

// Length of a currency symbol starting at `at`, or 0.
std::size_t currency_len(std::string_view s, std::size_t at) {
  if (at >= s.size()) return 0;
  if (s[at] == '$') return 1;
  if (s.substr(at, 3) == "\xE2\x82\xAC") return 3;  // euro sign
  if (s.substr(at, 2) == "\xC2\xA3") return 2;      // pound sign
  return 0;
}

// Length of a minus/plus sign starting at `at`, or 0.
std::size_t sign_len(std::string_view s, std::size_t at, bool& negative) {
  if (at >= s.size()) return 0;
  if (s[at] == '-') { negative = true; return 1; }
  if (s[at] == '+') { negative = false; return 1; }
  if (s.substr(at, 3) == "\xE2\x88\x92") { negative = true; return 3; }  // U+2212
  return 0;
}

std::size_t count_digits(std::string_view s, std::size_t at) {
  std::size_t n = 0;
  while (at + n < s.size() && is_digit(s[at + n])) ++n;
  return n;
}

std::optional<NumberToken> lex_number(std::string_view s, std::size_t start) {
  std::size_t j = start;
  bool negative = false;
  bool currency = false;
  const bool sign_allowed = start == 0 || !(is_digit(s[start - 1]) || is_word(s[start - 1]) ||
                                            s[start - 1] == '.');
  bool neg = false;
  if (const auto g = sign_allowed ? sign_len(s, j, neg) : 0; g > 0) {
    negative = neg;
    j += g;
  }
  if (const auto c = currency_len(s, j); c > 0) {
    currency = true;
    j += c;
    if (const auto g = (sign_allowed && j - c == start) ? sign_len(s, j, neg) : 0; g > 0) {
      negative = neg;
      j += g;
    }
  }

  const auto int_digits = count_digits(s, j);
  const bool leading_dot = int_digits == 0 && j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1]);
  if (int_digits == 0 && !leading_dot) return std::nullopt;

  std::string literal = negative ? "-" : "";
  literal.append(s.substr(j, int_digits));
  j += int_digits;

  // Thousands groups ",ddd" are accepted when the literal carries a currency
  // symbol or the groups are followed by a decimal fraction ("1,234.56").
  if (int_digits >= 1 && int_digits <= 3) {
    std::size_t g = j;
    std::string grouped;
    while (g < s.size() && s[g] == ',' && count_digits(s, g + 1) == 3) {
      grouped.append(s.substr(g + 1, 3));
      g += 4;
    }
    const bool has_fraction = g + 1 < s.size() && s[g] == '.' && is_digit(s[g + 1]);
    if (!grouped.empty() && (currency || has_fraction)) {
      literal += grouped;
      j = g;
    }
  }

  if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
    const auto frac = count_digits(s, j + 1);
    literal.append(s.substr(j, frac + 1));
    j += frac + 1;
  }
  if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
    std::size_t e = j + 1;
    if (e < s.size() && (s[e] == '+' || s[e] == '-')) ++e;
    const auto exp_digits = count_digits(s, e);
    if (exp_digits > 0) {
      literal.append(s.substr(j, e + exp_digits - j));
      j = e + exp_digits;
    }
  }

  NumberToken tok{};
  tok.begin = start;
  tok.end = j;
  tok.glued = (start > 0 && is_word(s[start - 1])) || (j < s.size() && is_word(s[j]));
  if (literal.front() == '.' || (literal.size() > 1 && literal[0] == '-' && literal[1] == '.'))
    literal.insert(literal.front() == '-' ? 1 : 0, "0");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), v);
  if (ec != std::errc{} || !std::isfinite(v)) tok.glued = true;  // unusable either way
  tok.value = v;
  return tok;
}

std::vector<NumberToken> scan_numbers(std::string_view s) {
  std::vector<NumberToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (auto tok = lex_number(s, i)) {
      out.push_back(*tok);
      i = tok->end;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(PromptMode mode) noexcept {
  switch (mode) {
    case PromptMode::TextOnly: return "text_only";
    case PromptMode::Multimodal: return "multimodal";
    case PromptMode::MultimodalCoT: return "cot";
  }
  return "text_only";
}

PromptMode parse_prompt_mode(std::string_view name) {
  if (name == "text_only" || name == "text") return PromptMode::TextOnly;
  if (name == "multimodal") return PromptMode::Multimodal;
  if (name == "cot" || name == "multimodal_cot") return PromptMode::MultimodalCoT;
  throw Error(Errc::InvalidArgument, "unknown prompt mode '" + std::string(name) + "'");
}

std::string_view to_string(ParseStrategy strategy) noexcept {
  return strategy == ParseStrategy::BracketList ? "bracket_list" : "trailing_numbers";
}

std::string format_values(std::span<const double> values, int decimals) {
  std::string out = "[";
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    std::snprintf(buf, sizeof buf, "%.*f", decimals, values[i]);
    out += buf;
  }
  out += "]";
  return out;
}

std::string_view prompt_template(PromptMode mode) noexcept {
  switch (mode) {
    case PromptMode::TextOnly: return templates::text_only;
    case PromptMode::Multimodal: return templates::multimodal;
    case PromptMode::MultimodalCoT: return templates::cot;
  }
  return templates::text_only;
}

std::string fill_template(std::string_view tmpl, std::size_t price_length,
                          std::string_view price_values, std::size_t prediction_interval) {
  static constexpr std::string_view kLength = "<PRICE_LENGTH>";
  static constexpr std::string_view kValues = "<PRICE_VALUES>";
  static constexpr std::string_view kInterval = "<PREDICTION_INTERVAL>";
  const auto length_text = std::to_string(price_length);
  const auto interval_text = std::to_string(prediction_interval);

  std::string out;
  out.reserve(tmpl.size() + price_values.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.substr(i, kLength.size()) == kLength) {
      out += length_text;
      i += kLength.size();
    } else if (tmpl.substr(i, kValues.size()) == kValues) {
      out += price_values;
      i += kValues.size();
    } else if (tmpl.substr(i, kInterval.size()) == kInterval) {
      out += interval_text;
      i += kInterval.size();
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

PromptBundle build_prompt(PromptMode mode, const ForecastSegment& segment,
                          const std::optional<ChartImage>& image, int decimals) {
  if (requires_image(mode) && !image)
    throw Error(Errc::MissingImage, std::string(to_string(mode)) + " prompt needs a chart");
  if (!requires_image(mode) && image)
    throw Error(Errc::UnexpectedImage, "text-only prompt must not carry a chart");
  if (segment.input.empty() || segment.truth.empty())
    throw Error(Errc::InvalidArgument, "segment has no input or horizon");

  PromptBundle bundle;
  bundle.mode = mode;
  bundle.text = fill_template(prompt_template(mode), segment.input.size(),
                              format_values(segment.input, decimals), segment.truth.size());
  if (image) bundle.image = encode_png(*image);
  bundle.segment_ref = "seg" + std::to_string(segment.start_index);
  bundle.horizon = segment.truth.size();
  bundle.input = segment.input;
  return bundle;
}

Forecast parse_forecast(std::string_view raw, std::size_t horizon) {
  if (horizon < 1) throw Error(Errc::InvalidArgument, "horizon must be >= 1");
  const auto tokens = scan_numbers(raw);

  Forecast result;
  result.raw_response = std::string(raw);

  // Innermost bracket spans, in order of their closing bracket.
  std::size_t open = std::string_view::npos;
  std::vector<double> best;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '[') {
      open = i;
    } else if (raw[i] == ']' && open != std::string_view::npos) {
      std::vector<double> inside;
      for (const auto& t : tokens)
        if (!t.glued && t.begin > open && t.end <= i) inside.push_back(t.value);
      if (inside.size() >= horizon) best.assign(inside.begin(), inside.begin() + static_cast<std::ptrdiff_t>(horizon));
      open = std::string_view::npos;
    }
  }
  if (!best.empty()) {
    result.values = std::move(best);
    result.parse_strategy = ParseStrategy::BracketList;
    return result;
  }

  std::vector<double> loose;
  for (const auto& t : tokens)
    if (!t.glued) loose.push_back(t.value);
  if (loose.size() >= horizon) {
    result.values.assign(loose.end() - static_cast<std::ptrdiff_t>(horizon), loose.end());
    result.parse_strategy = ParseStrategy::TrailingNumbers;
    return result;
  }
  throw Error(Errc::NoForecastFound,
              "found " + std::to_string(loose.size()) + " numbers, need " + std::to_string(horizon),
              std::string(raw));
}

}  // namespace vista
