#pragma once

#include <charconv>
#include <string>

#include "vrtc/errors.hpp"

namespace vrtc {

// Shortest decimal form that round-trips to the exact same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Strict full-string double parse.
inline double parse_double(const std::string& text, const std::string& context) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(context + ": bad number \"" + text + "\"");
  return v;
}

inline int64_t parse_int(const std::string& text, const std::string& context) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(context + ": bad integer \"" + text + "\"");
  return v;
}

inline uint64_t parse_u64(const std::string& text, const std::string& context) {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(context + ": bad unsigned integer \"" + text + "\"");
  return v;
}

}  // namespace vrtc
