#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "json_format.hpp"
#include "temporal.hpp"

namespace epiportrait {

// ---------------------------------------------------------------------------
// Windowed sums
// ---------------------------------------------------------------------------

inline std::map<std::string, std::uint64_t> window_sum(const SeriesMap& series, const SpanRange& range) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [code, s] : series) {
    if (!range.empty() && range.to >= s.counts.size())
      throw InvalidArgument("window_sum: range exceeds series of '" + code + "'");
    std::uint64_t sum = 0;
    for (std::size_t x = range.from; !range.empty() && x <= range.to; ++x) sum += s.counts[x];
    out[code] = sum;
  }
  return out;
}

inline std::map<std::string, std::optional<std::size_t>> first_case_spans(const SeriesMap& series) {
  std::map<std::string, std::optional<std::size_t>> out;
  for (const auto& [code, s] : series) {
    auto it = std::find_if(s.counts.begin(), s.counts.end(), [](auto c) { return c > 0; });
    out[code] = it == s.counts.end() ? std::nullopt
                                     : std::optional<std::size_t>(static_cast<std::size_t>(it - s.counts.begin()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rankings
// ---------------------------------------------------------------------------

struct RankEntry {
  std::string code;
  double value = 0;
  std::size_t rank = 0;
  bool operator==(const RankEntry&) const = default;
};

struct RankedList {
  std::string metric;
  std::vector<RankEntry> entries;
  std::vector<std::string> exclusions;
};

// Orders by value descending, ties by code ascending; dense ranks from 1.
inline RankedList rank_values(std::string metric, const std::map<std::string, double>& values) {
  RankedList out{std::move(metric), {}, {}};
  for (const auto& [code, v] : values) out.entries.push_back({code, v, 0});
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.value > b.value; });
  std::size_t rank = 0;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    if (i == 0 || out.entries[i].value != out.entries[i - 1].value) ++rank;
    out.entries[i].rank = rank;
  }
  return out;
}

inline const std::vector<std::string>& rank_metrics() {
  static const std::vector<std::string> metrics = [] {
    std::vector<std::string> m = {"total_cases", "cases_per_10k", "aged_male", "aged_female", "lower_income",
                                  "lone_person"};
    for (auto n : kIndicatorNames) m.emplace_back(n);
    return m;
  }();
  return metrics;
}

// Ranks communities by a case metric over `range` or by a census field.
// Under cases_per_10k, zero-population communities are listed in
// `exclusions` instead of ranked.
inline RankedList rank_by(std::string_view metric, const ProfileMap& profiles, const SeriesMap& series,
                          const SpanRange& range, double per_capita_divisor = 10000.0) {
  std::map<std::string, double> values;
  std::vector<std::string> excluded;
  const bool case_metric = metric == "total_cases" || metric == "cases_per_10k";
  std::map<std::string, std::uint64_t> sums;
  if (case_metric) sums = window_sum(series, range);
  for (const auto& [code, p] : profiles) {
    if (metric == "total_cases") {
      values[code] = static_cast<double>(sums.count(code) ? sums[code] : 0);
    } else if (metric == "cases_per_10k") {
      if (p.population == 0) {
        excluded.push_back(code);
        continue;
      }
      values[code] = per_capita_divisor * static_cast<double>(sums.count(code) ? sums[code] : 0) /
                     static_cast<double>(p.population);
    } else if (metric == "aged_male") {
      values[code] = static_cast<double>(p.aged_male_70p);
    } else if (metric == "aged_female") {
      values[code] = static_cast<double>(p.aged_female_70p);
    } else if (metric == "lower_income") {
      values[code] = static_cast<double>(p.lower_income);
    } else if (metric == "lone_person") {
      values[code] = static_cast<double>(p.lone_person);
    } else if (auto i = indicator_index(metric)) {
      values[code] = p.indicators[*i];
    } else {
      throw InvalidArgument("unknown ranking metric '" + std::string(metric) + "'");
    }
  }
  auto out = rank_values(std::string(metric), values);
  out.exclusions = std::move(excluded);
  return out;
}

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------

struct HeatmapCell {
  std::string code;
  std::uint64_t sum = 0;
  double intensity = 0;
};

struct HeatmapFrame {
  SpanRange range;
  std::vector<HeatmapCell> cells;
  std::optional<std::uint64_t> max_sum;  // absent when the window has no cases
};

// intensity = log1p(sum) / log1p(max sum in window).
inline HeatmapFrame heatmap(const SeriesMap& series, const SpanRange& range) {
  HeatmapFrame f{range, {}, std::nullopt};
  auto sums = window_sum(series, range);
  std::uint64_t max = 0;
  for (const auto& [code, s] : sums) max = std::max(max, s);
  if (max > 0) f.max_sum = max;
  const double denom = std::log1p(static_cast<double>(max));
  for (const auto& [code, s] : sums) {
    double intensity = 0;
    if (max > 0) intensity = s == max ? 1.0 : std::log1p(static_cast<double>(s)) / denom;
    f.cells.push_back({code, s, intensity});
  }
  return f;
}

// ---------------------------------------------------------------------------
// Multidimensional coordinates
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMdcAxes = 13;

struct MdcRow {
  std::string code;
  std::array<double, kMdcAxes> raw{};
  std::array<double, kMdcAxes> normalized{};
};

struct MdcDataset {
  std::array<std::string, kMdcAxes> axes;
  std::array<double, kMdcAxes> min{};
  std::array<double, kMdcAxes> max{};
  std::array<bool, kMdcAxes> constant{};  // axis normalized to 0.5
  std::vector<MdcRow> rows;

  std::optional<std::size_t> axis_index(std::string_view name) const {
    for (std::size_t i = 0; i < kMdcAxes; ++i)
      if (axes[i] == name) return i;
    return std::nullopt;
  }
};

inline std::array<std::string, kMdcAxes> mdc_axes() {
  std::array<std::string, kMdcAxes> a;
  for (std::size_t i = 0; i < kIndicatorNames.size(); ++i) a[i] = kIndicatorNames[i];
  a[12] = "total_cases";
  return a;
}

// Twelve census indicators plus windowed case totals, min-max normalized.
inline MdcDataset mdc_dataset(const ProfileMap& profiles, const SeriesMap& series, const SpanRange& range) {
  MdcDataset ds;
  ds.axes = mdc_axes();
  auto sums = window_sum(series, range);
  for (const auto& [code, p] : profiles) {
    MdcRow row;
    row.code = code;
    for (std::size_t i = 0; i < kIndicatorNames.size(); ++i) row.raw[i] = p.indicators[i];
    row.raw[12] = static_cast<double>(sums.count(code) ? sums[code] : 0);
    ds.rows.push_back(std::move(row));
  }
  for (std::size_t a = 0; a < kMdcAxes; ++a) {
    if (ds.rows.empty()) break;
    double lo = ds.rows.front().raw[a], hi = lo;
    for (const auto& r : ds.rows) {
      lo = std::min(lo, r.raw[a]);
      hi = std::max(hi, r.raw[a]);
    }
    ds.min[a] = lo;
    ds.max[a] = hi;
    ds.constant[a] = lo == hi;
    for (auto& r : ds.rows) {
      if (ds.constant[a]) {
        r.normalized[a] = 0.5;
      } else if (r.raw[a] == lo) {
        r.normalized[a] = 0.0;
      } else if (r.raw[a] == hi) {
        r.normalized[a] = 1.0;
      } else {
        r.normalized[a] = (r.raw[a] - lo) / (hi - lo);
      }
    }
  }
  return ds;
}

using BrushIntervals = std::map<std::string, std::pair<double, double>>;

// Communities whose normalized value lies in [lo, hi] on every brushed axis.
inline std::set<std::string> brush_filter(const MdcDataset& ds, const BrushIntervals& intervals) {
  std::vector<std::pair<std::size_t, std::pair<double, double>>> brushed;
  for (const auto& [axis, iv] : intervals) {
    auto i = ds.axis_index(axis);
    if (!i) throw NotFound("brush: unknown axis '" + axis + "'");
    brushed.emplace_back(*i, iv);
  }
  std::set<std::string> out;
  for (const auto& r : ds.rows) {
    bool pass = true;
    for (const auto& [a, iv] : brushed) {
      const double v = r.normalized[a];
      if (!(v >= iv.first && v <= iv.second)) {
        pass = false;
        break;
      }
    }
    if (pass) out.insert(r.code);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

struct SearchHit {
  std::string code;
  std::string name;
  bool operator==(const SearchHit&) const = default;
};

// Case-insensitive match on name or code. Prefix hits come first, then
// substring hits; each group ordered by name, then code.
inline std::vector<SearchHit> search(std::string_view query, const std::vector<SearchHit>& candidates) {
  const auto q = detail::lower(query);
  std::vector<SearchHit> prefix, inner;
  for (const auto& c : candidates) {
    const auto name = detail::lower(c.name), code = detail::lower(c.code);
    if (name.starts_with(q) || code.starts_with(q)) {
      prefix.push_back(c);
    } else if (name.find(q) != std::string::npos || code.find(q) != std::string::npos) {
      inner.push_back(c);
    }
  }
  auto by_name = [](const SearchHit& a, const SearchHit& b) {
    return std::tie(a.name, a.code) < std::tie(b.name, b.code);
  };
  std::sort(prefix.begin(), prefix.end(), by_name);
  std::sort(inner.begin(), inner.end(), by_name);
  prefix.insert(prefix.end(), inner.begin(), inner.end());
  return prefix;
}

// ---------------------------------------------------------------------------
// JSON / CSV shapes
// ---------------------------------------------------------------------------

inline Json ranked_to_json(const RankedList& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) entries.push_back({{"code", e.code}, {"value", e.value}, {"rank", e.rank}});
  return {{"metric", r.metric}, {"entries", std::move(entries)}, {"exclusions", r.exclusions}};
}

inline std::string ranked_to_csv(const RankedList& r) {
  std::string out = "rank,code,value\n";
  for (const auto& e : r.entries)
    out += std::to_string(e.rank) + ',' + csv::escape(e.code) + ',' + format_double(e.value) + '\n';
  return out;
}

inline Json heatmap_to_json(const HeatmapFrame& f) {
  Json cells = Json::array();
  for (const auto& c : f.cells) cells.push_back({{"code", c.code}, {"sum", c.sum}, {"intensity", c.intensity}});
  return {{"from", f.range.from},
          {"to", f.range.to},
          {"max_sum", f.max_sum ? Json(*f.max_sum) : Json(nullptr)},
          {"cells", std::move(cells)}};
}

inline Json mdc_to_json(const MdcDataset& ds) {
  Json axes = Json::array();
  for (std::size_t a = 0; a < kMdcAxes; ++a)
    axes.push_back({{"name", ds.axes[a]}, {"min", ds.min[a]}, {"max", ds.max[a]}, {"constant", ds.constant[a]}});
  Json rows = Json::array();
  for (const auto& r : ds.rows) rows.push_back({{"code", r.code}, {"raw", r.raw}, {"normalized", r.normalized}});
  return {{"axes", std::move(axes)}, {"rows", std::move(rows)}};
}

inline std::string mdc_to_csv(const MdcDataset& ds) {
  std::string out = "code";
  for (const auto& a : ds.axes) out += ',' + a;
  out += '\n';
  for (const auto& r : ds.rows) {
    out += csv::escape(r.code);
    for (double v : r.normalized) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace epiportrait
