#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "nlasso/error.hpp"

namespace nlasso::detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// "name:rest" -> {"name", "rest"}; "name" -> {"name", ""}.
inline std::pair<std::string_view, std::string_view> split_head(std::string_view s) {
  s = trim(s);
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return {s, {}};
  return {trim(s.substr(0, colon)), trim(s.substr(colon + 1))};
}

inline double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorKind::ParseError, std::string(what) + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, std::string(what) + ": not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace nlasso::detail
