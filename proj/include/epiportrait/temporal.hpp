#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "date.hpp"
#include "error.hpp"
#include "ingest.hpp"
#include "json_format.hpp"

namespace epiportrait {

enum class Granularity : std::uint8_t { weekly, fortnightly };

inline int span_days(Granularity g) { return g == Granularity::weekly ? 7 : 14; }

inline std::string_view to_string(Granularity g) { return g == Granularity::weekly ? "weekly" : "fortnightly"; }

inline Granularity parse_granularity(std::string_view s) {
  if (s == "weekly") return Granularity::weekly;
  if (s == "fortnightly") return Granularity::fortnightly;
  throw InvalidArgument("unknown granularity '" + std::string(s) + "'");
}

struct TimeSpan {
  std::size_t index = 0;
  Date start;
  Date end;        // inclusive
  bool partial = false;  // trailing span shorter than the granularity

  bool operator==(const TimeSpan&) const = default;
};

struct TimeSpanGrid {
  DateRange window;
  Granularity granularity = Granularity::weekly;
  std::vector<TimeSpan> spans;

  std::size_t size() const { return spans.size(); }

  std::optional<std::size_t> span_of(Date d) const {
    if (!window.contains(d)) return std::nullopt;
    return static_cast<std::size_t>((d - window.start).count() / span_days(granularity));
  }

  bool operator==(const TimeSpanGrid&) const = default;
};

// Partitions the window into consecutive 7- or 14-day spans. A trailing
// remainder becomes one shorter span flagged `partial`.
inline TimeSpanGrid build_grid(const DateRange& window, Granularity g) {
  if (window.end < window.start) throw InvalidArgument("grid window is empty");
  TimeSpanGrid grid{window, g, {}};
  const int len = span_days(g);
  Date start = window.start;
  for (std::size_t i = 0; start <= window.end; ++i) {
    Date end = start + std::chrono::days{len - 1};
    bool partial = false;
    if (end > window.end) {
      end = window.end;
      partial = true;
    }
    grid.spans.push_back({i, start, end, partial});
    start = end + std::chrono::days{1};
  }
  return grid;
}

// Inclusive span-index range; from > to denotes the empty range.
struct SpanRange {
  std::size_t from = 0;
  std::size_t to = 0;

  bool empty() const { return from > to; }
  std::size_t size() const { return empty() ? 0 : to - from + 1; }
  bool contains(std::size_t x) const { return x >= from && x <= to; }

  static SpanRange full(const TimeSpanGrid& g) {
    return g.size() == 0 ? SpanRange{1, 0} : SpanRange{0, g.size() - 1};
  }
};

inline void check_range(const SpanRange& r, const TimeSpanGrid& g) {
  if (!r.empty() && r.to >= g.size())
    throw InvalidArgument("span range [" + std::to_string(r.from) + ", " + std::to_string(r.to) +
                          "] exceeds grid of " + std::to_string(g.size()) + " spans");
}

// Per-community counts, one per grid span.
struct CaseSeries {
  std::string community_code;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
  bool operator==(const CaseSeries&) const = default;
};

using SeriesMap = std::map<std::string, CaseSeries>;

struct BucketResult {
  SeriesMap series;
  std::vector<QuarantinedRow> quarantined;  // row = index into the input case list
};

// Counts cases per (community, span). `known_codes` lists every community
// at `level`; each receives a series even when it has no cases.
inline BucketResult bucket_cases(const std::vector<CaseRecord>& cases, const TimeSpanGrid& grid,
                                 BoundaryLevel level, const std::vector<std::string>& known_codes) {
  BucketResult out;
  for (const auto& code : known_codes) out.series[code] = {code, std::vector<std::uint64_t>(grid.size(), 0)};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto& key = level == BoundaryLevel::lga ? c.community_code : c.postal_code;
    auto span = grid.span_of(c.notification_date);
    if (!span) {
      out.quarantined.push_back({i, std::string(reason::outside_window), format_date(c.notification_date)});
      continue;
    }
    auto it = out.series.find(key);
    if (it == out.series.end()) {
      out.quarantined.push_back({i, std::string(reason::unknown_community), key});
      continue;
    }
    ++it->second.counts[*span];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intervention phases
// ---------------------------------------------------------------------------

// Ordered by restrictiveness.
enum class Phase : std::uint8_t { uncontrolled = 0, eased = 1, restrict_controlled = 2 };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::uncontrolled: return "uncontrolled";
    case Phase::eased: return "eased";
    case Phase::restrict_controlled: return "restrict_controlled";
  }
  return "";
}

struct PhaseRules {
  std::vector<std::string> eased;
  std::vector<std::string> restrict_controlled;

  static PhaseRules defaults() {
    return {{"social distance", "mask", "masks required", "gathering limit"},
            {"lockdown", "curfew", "bubble restriction", "stay-at-home"}};
  }

  static PhaseRules from_json(const nlohmann::json& j) {
    PhaseRules r;
    auto read = [&](const char* key, std::vector<std::string>& dst) {
      if (!j.contains(key)) return;
      if (!j[key].is_array()) throw FormatError(std::string("rules: '") + key + "' must be an array");
      for (const auto& k : j[key]) dst.push_back(detail::lower(k.get<std::string>()));
    };
    read("eased", r.eased);
    read("restrict_controlled", r.restrict_controlled);
    return r;
  }
};

struct TriggeringEvent {
  Date date;
  std::string text;
  std::string keyword;
  Phase label = Phase::uncontrolled;
};

struct PhaseTimeline {
  std::vector<Phase> labels;  // one per span
  std::vector<std::vector<TriggeringEvent>> triggering_events;
  std::vector<EventLine> unmatched;
};

// Label of one headline: the most restrictive class with a matching keyword
// (case-insensitive substring), if any. The reported keyword is the longest
// match within that class.
inline std::optional<std::pair<Phase, std::string>> match_event(std::string_view text, const PhaseRules& rules) {
  auto t = detail::lower(text);
  auto longest = [&](const std::vector<std::string>& keys) -> std::optional<std::string> {
    std::optional<std::string> best;
    for (const auto& k : keys)
      if (!k.empty() && t.find(detail::lower(k)) != std::string::npos && (!best || k.size() > best->size())) best = k;
    return best;
  };
  if (auto k = longest(rules.restrict_controlled)) return std::pair{Phase::restrict_controlled, *k};
  if (auto k = longest(rules.eased)) return std::pair{Phase::eased, *k};
  return std::nullopt;
}

// Most restrictive matched label wins within a span; spans with no matched
// event carry the previous label forward; the first span starts uncontrolled.
inline PhaseTimeline classify_phases(const std::vector<EventLine>& events, const TimeSpanGrid& grid,
                                     const PhaseRules& rules) {
  PhaseTimeline tl;
  tl.labels.assign(grid.size(), Phase::uncontrolled);
  tl.triggering_events.resize(grid.size());
  for (const auto& e : events) {
    auto span = grid.span_of(e.date);
    auto m = match_event(e.text, rules);
    if (!span || !m) {
      tl.unmatched.push_back(e);
      continue;
    }
    tl.triggering_events[*span].push_back({e.date, e.text, m->second, m->first});
  }
  for (auto& v : tl.triggering_events)
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.date < b.date; });

  Phase current = Phase::uncontrolled;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const auto& trig = tl.triggering_events[x];
    if (!trig.empty()) {
      current = Phase::uncontrolled;
      for (const auto& t : trig) current = std::max(current, t.label);
    }
    tl.labels[x] = current;
  }
  return tl;
}

}  // namespace epiportrait
