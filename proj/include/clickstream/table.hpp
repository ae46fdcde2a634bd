#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace clickstream {

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

/// Fixed-precision rendering for human-facing report columns.
inline std::string fmt_fixed(double x, int digits) {
  if (!std::isfinite(x)) return fmt_num(x);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

template <typename Range, typename Fn>
std::string join_mapped(const Range& xs, std::string_view sep, Fn fn) {
  std::string out;
  bool first = true;
  for (const auto& x : xs) {
    if (!first) out += sep;
    first = false;
    out += fn(x);
  }
  return out;
}

/// Writes one tab-separated row.
inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << '\t';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace clickstream
