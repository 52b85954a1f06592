#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace epiportrait {

using Date = std::chrono::sys_days;

// Inclusive calendar-date range.
struct DateRange {
  Date start;
  Date end;

  bool contains(Date d) const { return d >= start && d <= end; }
  long days() const { return (end - start).count() + 1; }
  bool operator==(const DateRange&) const = default;
};

// Strict ISO-8601 calendar date, YYYY-MM-DD. Returns nullopt on anything else.
inline std::optional<Date> try_parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t from, std::size_t len, int& out) {
    out = 0;
    for (std::size_t i = from; i < from + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      out = out * 10 + (s[i] - '0');
    }
    return true;
  };
  int y = 0, m = 0, d = 0;
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline Date parse_date(std::string_view s) {
  auto d = try_parse_date(s);
  if (!d) throw FormatError("invalid ISO date '" + std::string(s) + "'");
  return *d;
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline DateRange make_window(std::string_view start, std::string_view end) {
  DateRange w{parse_date(start), parse_date(end)};
  if (w.end < w.start) throw InvalidArgument("window end precedes start");
  return w;
}

}  // namespace epiportrait
