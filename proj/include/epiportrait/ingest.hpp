#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "date.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "json_format.hpp"

namespace epiportrait {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class AgeBand : std::uint8_t {
  a0_9, a10_19, a20_29, a30_39, a40_49, a50_59, a60_69, a70_79, a80_89, a90p, unknown
};

inline constexpr std::array<std::string_view, 10> kAgeBandLabels = {
    "0-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70-79", "80-89", "90+"};

inline std::string_view to_string(AgeBand b) {
  if (b == AgeBand::unknown) return "unknown";
  return kAgeBandLabels[static_cast<std::size_t>(b)];
}

inline std::optional<AgeBand> parse_age_band(std::string_view s) {
  if (s.empty() || s == "unknown" || s == "Unknown") return AgeBand::unknown;
  for (std::size_t i = 0; i < kAgeBandLabels.size(); ++i)
    if (kAgeBandLabels[i] == s) return static_cast<AgeBand>(i);
  return std::nullopt;
}

struct CaseRecord {
  Date notification_date;
  std::string postal_code;
  std::string community_code;
  AgeBand age_band = AgeBand::unknown;
  std::optional<std::string> likely_source;

  bool operator==(const CaseRecord&) const = default;
};

// A rejected input row. `row` is the 1-based data row (header excluded).
struct QuarantinedRow {
  std::size_t row = 0;
  std::string reason;
  std::string raw;

  bool operator==(const QuarantinedRow&) const = default;
};

namespace reason {
inline constexpr std::string_view column_count = "column_count";
inline constexpr std::string_view bad_date = "bad_date";
inline constexpr std::string_view outside_window = "outside_window";
inline constexpr std::string_view bad_age_band = "bad_age_band";
inline constexpr std::string_view missing_code = "missing_code";
inline constexpr std::string_view unknown_community = "unknown_community";
inline constexpr std::string_view excluded = "excluded";
inline constexpr std::string_view bad_json = "bad_json";
}  // namespace reason

inline constexpr std::array<std::string_view, 12> kIndicatorNames = {
    "median_age",
    "population",
    "area_size",
    "population_density",
    "median_rent",
    "median_mortgage",
    "median_personal_income",
    "median_family_income",
    "median_household_income",
    "avg_bedrooms_per_person",
    "avg_bedrooms_per_household",
    "public_transport_rate"};

inline std::optional<std::size_t> indicator_index(std::string_view name) {
  for (std::size_t i = 0; i < kIndicatorNames.size(); ++i)
    if (kIndicatorNames[i] == name) return i;
  return std::nullopt;
}

// The four risk-factor counts drawn as RNA strands.
enum class KeyFactor : std::uint8_t { aged_male, aged_female, lower_income, lone_person };

inline constexpr std::array<KeyFactor, 4> kKeyFactors = {
    KeyFactor::aged_male, KeyFactor::aged_female, KeyFactor::lower_income, KeyFactor::lone_person};

inline std::string_view to_string(KeyFactor f) {
  switch (f) {
    case KeyFactor::aged_male: return "aged_male";
    case KeyFactor::aged_female: return "aged_female";
    case KeyFactor::lower_income: return "lower_income";
    case KeyFactor::lone_person: return "lone_person";
  }
  return "";
}

struct CommunityProfile {
  std::string code;
  std::string name;
  std::uint64_t population = 0;
  double area_km2 = 0;
  std::uint64_t aged_male_70p = 0;
  std::uint64_t aged_female_70p = 0;
  std::uint64_t lower_income = 0;
  std::uint64_t lone_person = 0;
  std::array<double, 12> indicators{};  // ordered as kIndicatorNames

  std::uint64_t key_factor(KeyFactor f) const {
    switch (f) {
      case KeyFactor::aged_male: return aged_male_70p;
      case KeyFactor::aged_female: return aged_female_70p;
      case KeyFactor::lower_income: return lower_income;
      case KeyFactor::lone_person: return lone_person;
    }
    return 0;
  }

  double indicator(std::string_view name) const {
    auto i = indicator_index(name);
    if (!i) throw NotFound("unknown indicator '" + std::string(name) + "'");
    return indicators[*i];
  }

  bool operator==(const CommunityProfile&) const = default;
};

using ProfileMap = std::map<std::string, CommunityProfile>;

enum class BoundaryLevel : std::uint8_t { lga, postal_area };

inline std::string_view to_string(BoundaryLevel l) {
  return l == BoundaryLevel::lga ? "lga" : "postal_area";
}

inline BoundaryLevel parse_level(std::string_view s) {
  if (s == "lga") return BoundaryLevel::lga;
  if (s == "postal_area" || s == "postal") return BoundaryLevel::postal_area;
  throw InvalidArgument("unknown boundary level '" + std::string(s) + "'");
}

struct LonLat {
  double lon = 0;
  double lat = 0;
  bool operator==(const LonLat&) const = default;
};

using Ring = std::vector<LonLat>;
using Polygon = std::vector<Ring>;  // outer ring then holes

struct BoundingBox {
  double min_lon = 0, min_lat = 0, max_lon = 0, max_lat = 0;
  bool operator==(const BoundingBox&) const = default;
};

struct BoundaryFeature {
  std::string code;
  std::string name;
  std::vector<Polygon> polygons;  // one entry for Polygon, several for MultiPolygon

  bool operator==(const BoundaryFeature&) const = default;
};

struct BoundarySet {
  BoundaryLevel level = BoundaryLevel::lga;
  std::vector<BoundaryFeature> features;
  BoundingBox bbox;

  bool operator==(const BoundarySet&) const = default;
};

struct EventLine {
  Date date;
  std::string text;
  bool operator==(const EventLine&) const = default;
};

struct ParsedCases {
  std::vector<CaseRecord> accepted;
  std::vector<std::size_t> accepted_rows;  // source row of each accepted record
  std::vector<QuarantinedRow> quarantined;
  std::size_t rows = 0;
};

struct ParsedEvents {
  std::vector<EventLine> events;
  std::vector<QuarantinedRow> quarantined;
};

// Drops matching case rows at parse time. `field` names a case CSV column;
// `contains` is a case-insensitive substring match, otherwise exact equality.
struct RowExclusion {
  std::string field;
  std::string value;
  bool contains = false;
};

struct IngestOptions {
  std::vector<RowExclusion> exclusions;
  // Retired community code -> current code, applied when joining cases.
  std::map<std::string, std::string> code_aliases;
};

struct DatasetSnapshot {
  DateRange window;
  std::size_t raw_case_rows = 0;
  std::vector<CaseRecord> cases;
  std::vector<QuarantinedRow> quarantined;
  ProfileMap communities;
  std::map<BoundaryLevel, BoundarySet> boundaries;
  std::vector<EventLine> events;
  std::size_t quarantined_events = 0;

  bool operator==(const DatasetSnapshot&) const = default;
};

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::optional<std::uint64_t> parse_count(std::string_view s) {
  std::uint64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Maps required column names to their index in a header record.
inline std::vector<std::size_t> locate_columns(const std::vector<std::string>& header,
                                               std::span<const std::string_view> required,
                                               std::string_view what) {
  std::vector<std::size_t> idx;
  std::string missing;
  for (auto name : required) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (!missing.empty()) missing += ", ";
      missing += name;
    } else {
      idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (!missing.empty())
    throw FormatError(std::string(what) + ": header lacks column(s): " + missing);
  return idx;
}

}  // namespace detail

inline constexpr std::array<std::string_view, 5> kCaseColumns = {
    "notification_date", "postal_code", "lga_code", "age_band", "likely_source"};

// Parses the case table. Every data row ends up either accepted or
// quarantined with a reason; only a missing/incomplete header is fatal.
inline ParsedCases parse_cases(std::string_view text, const DateRange& window,
                               const std::vector<RowExclusion>& exclusions = {}) {
  auto all = csv::lines(text);
  while (!all.empty() && all.back().empty()) all.pop_back();
  if (all.empty()) throw FormatError("case table: missing header");
  auto header = csv::split_record(all.front());
  auto col = detail::locate_columns(header, kCaseColumns, "case table");

  struct ExclusionCol {
    std::size_t index;
    const RowExclusion* rule;
  };
  std::vector<ExclusionCol> rules;
  for (const auto& r : exclusions) {
    auto it = std::find(header.begin(), header.end(), r.field);
    if (it == header.end()) throw FormatError("exclusion rule names unknown column '" + r.field + "'");
    rules.push_back({static_cast<std::size_t>(it - header.begin()), &r});
  }

  ParsedCases out;
  for (std::size_t li = 1; li < all.size(); ++li) {
    const std::size_t row = li;
    ++out.rows;
    auto line = all[li];
    auto quarantine = [&](std::string_view why) {
      out.quarantined.push_back({row, std::string(why), std::string(line)});
    };
    auto f = csv::split_record(line);
    if (f.size() != header.size()) {
      quarantine(reason::column_count);
      continue;
    }
    bool excluded = false;
    for (const auto& [index, rule] : rules) {
      const auto& v = f[index];
      excluded = rule->contains ? detail::lower(v).find(detail::lower(rule->value)) != std::string::npos
                                : v == rule->value;
      if (excluded) break;
    }
    if (excluded) {
      quarantine(reason::excluded);
      continue;
    }
    auto date = try_parse_date(f[col[0]]);
    if (!date) {
      quarantine(reason::bad_date);
      continue;
    }
    if (!window.contains(*date)) {
      quarantine(reason::outside_window);
      continue;
    }
    if (f[col[2]].empty()) {
      quarantine(reason::missing_code);
      continue;
    }
    auto band = parse_age_band(f[col[3]]);
    if (!band) {
      quarantine(reason::bad_age_band);
      continue;
    }
    CaseRecord rec;
    rec.notification_date = *date;
    rec.postal_code = f[col[1]];
    rec.community_code = f[col[2]];
    rec.age_band = *band;
    if (!f[col[4]].empty()) rec.likely_source = f[col[4]];
    out.accepted.push_back(std::move(rec));
    out.accepted_rows.push_back(row);
  }
  return out;
}

inline constexpr std::array<std::string_view, 8> kProfileBaseColumns = {
    "code", "name", "population", "area_km2", "aged_male_70p", "aged_female_70p", "lower_income",
    "lone_person"};

inline ProfileMap parse_profiles(std::string_view text) {
  auto all = csv::lines(text);
  while (!all.empty() && all.back().empty()) all.pop_back();
  if (all.empty()) throw FormatError("profile table: missing header");
  auto header = csv::split_record(all.front());
  std::vector<std::string_view> required(kProfileBaseColumns.begin(), kProfileBaseColumns.end());
  required.insert(required.end(), kIndicatorNames.begin(), kIndicatorNames.end());
  auto col = detail::locate_columns(header, required, "profile table");

  ProfileMap out;
  for (std::size_t li = 1; li < all.size(); ++li) {
    auto where = "profile row " + std::to_string(li);
    auto f = csv::split_record(all[li]);
    if (f.size() != header.size()) throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields");
    auto count = [&](std::size_t c) {
      const auto& s = f[col[c]];
      if (!s.empty() && s.front() == '-') throw ValidationError(where + ": negative " + std::string(required[c]));
      auto v = detail::parse_count(s);
      if (!v) throw FormatError(where + ": invalid " + std::string(required[c]) + " '" + s + "'");
      return *v;
    };
    CommunityProfile p;
    p.code = f[col[0]];
    p.name = f[col[1]];
    if (p.code.empty()) throw ValidationError(where + ": empty code");
    p.population = count(2);
    auto area = detail::parse_real(f[col[3]]);
    if (!area || *area <= 0) throw ValidationError(where + ": area_km2 must be positive");
    p.area_km2 = *area;
    p.aged_male_70p = count(4);
    p.aged_female_70p = count(5);
    p.lower_income = count(6);
    p.lone_person = count(7);
    for (auto kf : kKeyFactors)
      if (p.key_factor(kf) > p.population)
        throw ValidationError(where + ": " + std::string(to_string(kf)) + " exceeds population");
    for (std::size_t i = 0; i < kIndicatorNames.size(); ++i) {
      auto v = detail::parse_real(f[col[kProfileBaseColumns.size() + i]]);
      if (!v) throw ValidationError(where + ": missing or invalid indicator " + std::string(kIndicatorNames[i]));
      p.indicators[i] = *v;
    }
    p.indicators[*indicator_index("population_density")] = static_cast<double>(p.population) / p.area_km2;
    auto code = p.code;
    if (!out.emplace(code, std::move(p)).second) throw ValidationError("duplicate community code '" + code + "'");
  }
  return out;
}

namespace detail {

inline Ring parse_ring(const nlohmann::json& j, std::size_t feature) {
  Ring ring;
  for (const auto& pt : j) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      throw FormatError("feature " + std::to_string(feature) + ": invalid coordinate");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (ring.size() < 4 || !(ring.front() == ring.back()))
    throw ValidationError("feature " + std::to_string(feature) + ": ring is not closed");
  return ring;
}

inline Polygon parse_polygon(const nlohmann::json& j, std::size_t feature) {
  if (!j.is_array() || j.empty()) throw FormatError("feature " + std::to_string(feature) + ": empty polygon");
  Polygon poly;
  for (const auto& r : j) poly.push_back(parse_ring(r, feature));
  return poly;
}

}  // namespace detail

// Parses a GeoJSON FeatureCollection. Each feature needs a "code" property;
// an optional "level" property must agree with `level`.
inline BoundarySet parse_boundaries(std::string_view text, BoundaryLevel level) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("boundaries: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw FormatError("boundaries: not a FeatureCollection");

  const auto& feats = doc["features"];
  std::string uncoded;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& props = feats[i].contains("properties") ? feats[i]["properties"] : nlohmann::json();
    bool ok = props.is_object() && props.contains("code") &&
              (props["code"].is_string() || props["code"].is_number_integer()) &&
              !(props["code"].is_string() && props["code"].get<std::string>().empty());
    if (!ok) uncoded += (uncoded.empty() ? "" : ",") + std::to_string(i);
  }
  if (!uncoded.empty()) throw ValidationError("boundaries: features lacking code property: " + uncoded);

  BoundarySet set;
  set.level = level;
  std::set<std::string> seen;
  bool first_point = true;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& feat = feats[i];
    const auto& props = feat["properties"];
    BoundaryFeature bf;
    bf.code = props["code"].is_string() ? props["code"].get<std::string>() : std::to_string(props["code"].get<long long>());
    if (props.contains("name") && props["name"].is_string()) bf.name = props["name"].get<std::string>();
    if (props.contains("level") && props["level"].is_string() &&
        parse_level(props["level"].get<std::string>()) != level)
      throw ValidationError("feature " + std::to_string(i) + ": level does not match " + std::string(to_string(level)));
    if (!seen.insert(bf.code).second)
      throw ValidationError("feature " + std::to_string(i) + ": duplicate code '" + bf.code + "'");
    if (!feat.contains("geometry") || !feat["geometry"].is_object())
      throw FormatError("feature " + std::to_string(i) + ": missing geometry");
    const auto& geom = feat["geometry"];
    auto type = geom.value("type", "");
    if (type == "Polygon") {
      bf.polygons.push_back(detail::parse_polygon(geom["coordinates"], i));
    } else if (type == "MultiPolygon") {
      for (const auto& p : geom["coordinates"]) bf.polygons.push_back(detail::parse_polygon(p, i));
    } else {
      throw FormatError("feature " + std::to_string(i) + ": unsupported geometry '" + type + "'");
    }
    for (const auto& poly : bf.polygons)
      for (const auto& ring : poly)
        for (const auto& pt : ring) {
          if (first_point) {
            set.bbox = {pt.lon, pt.lat, pt.lon, pt.lat};
            first_point = false;
          }
          set.bbox.min_lon = std::min(set.bbox.min_lon, pt.lon);
          set.bbox.min_lat = std::min(set.bbox.min_lat, pt.lat);
          set.bbox.max_lon = std::max(set.bbox.max_lon, pt.lon);
          set.bbox.max_lat = std::max(set.bbox.max_lat, pt.lat);
        }
    set.features.push_back(std::move(bf));
  }
  return set;
}

// One JSON object per line: {"date": "YYYY-MM-DD", "text": "..."}.
inline ParsedEvents parse_events(std::string_view text, const DateRange& window) {
  ParsedEvents out;
  std::size_t row = 0;
  for (auto line : csv::lines(text)) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    ++row;
    auto quarantine = [&](std::string_view why) {
      out.quarantined.push_back({row, std::string(why), std::string(line)});
    };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("date") || !j["date"].is_string() ||
        !j.contains("text") || !j["text"].is_string()) {
      quarantine(reason::bad_json);
      continue;
    }
    auto d = try_parse_date(j["date"].get<std::string>());
    if (!d) {
      quarantine(reason::bad_date);
      continue;
    }
    if (!window.contains(*d)) {
      quarantine(reason::outside_window);
      continue;
    }
    out.events.push_back({*d, j["text"].get<std::string>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot assembly
// ---------------------------------------------------------------------------

// Checks every snapshot invariant; throws ValidationError on the first breach.
inline void validate_snapshot(const DatasetSnapshot& s) {
  if (s.window.end < s.window.start) throw ValidationError("snapshot window is empty");
  if (s.cases.size() + s.quarantined.size() != s.raw_case_rows)
    throw ValidationError("case row conservation violated");
  for (const auto& c : s.cases) {
    if (!s.window.contains(c.notification_date))
      throw ValidationError("case dated " + format_date(c.notification_date) + " outside window");
    if (!s.communities.count(c.community_code))
      throw ValidationError("case references unknown community '" + c.community_code + "'");
  }
  for (const auto& [code, p] : s.communities) {
    if (code != p.code) throw ValidationError("community key mismatch for '" + code + "'");
    for (auto f : kKeyFactors)
      if (p.key_factor(f) > p.population) throw ValidationError("community '" + code + "': count exceeds population");
    if (!(p.area_km2 > 0)) throw ValidationError("community '" + code + "': non-positive area");
  }
  for (const auto& [level, set] : s.boundaries) {
    if (set.level != level) throw ValidationError("boundary level mismatch");
    std::set<std::string> seen;
    for (const auto& f : set.features) {
      if (f.code.empty() || !seen.insert(f.code).second) throw ValidationError("boundary codes must be unique and non-empty");
      if (level == BoundaryLevel::lga && !s.communities.count(f.code))
        throw ValidationError("boundary feature '" + f.code + "' has no community profile");
      for (const auto& poly : f.polygons)
        for (const auto& ring : poly)
          if (ring.size() < 4 || !(ring.front() == ring.back()))
            throw ValidationError("boundary feature '" + f.code + "' has an unclosed ring");
    }
  }
  for (const auto& e : s.events)
    if (!s.window.contains(e.date)) throw ValidationError("event outside window");
}

// Joins parsed inputs into a validated snapshot. Cases whose community code
// (after aliasing) has no profile move to quarantine.
inline std::shared_ptr<const DatasetSnapshot> build_snapshot(ParsedCases cases, ProfileMap profiles,
                                                             std::vector<BoundarySet> boundaries,
                                                             ParsedEvents events, const DateRange& window,
                                                             const IngestOptions& opts = {}) {
  auto snap = std::make_shared<DatasetSnapshot>();
  snap->window = window;
  snap->raw_case_rows = cases.rows;
  snap->quarantined = std::move(cases.quarantined);
  for (std::size_t i = 0; i < cases.accepted.size(); ++i) {
    auto& c = cases.accepted[i];
    if (auto a = opts.code_aliases.find(c.community_code); a != opts.code_aliases.end()) c.community_code = a->second;
    if (!profiles.count(c.community_code)) {
      snap->quarantined.push_back({i < cases.accepted_rows.size() ? cases.accepted_rows[i] : 0,
                                   std::string(reason::unknown_community),
                                   format_date(c.notification_date) + "," + c.postal_code + "," + c.community_code});
      continue;
    }
    snap->cases.push_back(std::move(c));
  }
  std::stable_sort(snap->quarantined.begin(), snap->quarantined.end(),
                   [](const QuarantinedRow& a, const QuarantinedRow& b) { return a.row < b.row; });
  snap->communities = std::move(profiles);
  for (auto& b : boundaries) {
    auto level = b.level;
    if (!snap->boundaries.emplace(level, std::move(b)).second)
      throw ValidationError("duplicate boundary set for level " + std::string(to_string(level)));
  }
  snap->events = std::move(events.events);
  snap->quarantined_events = events.quarantined.size();
  validate_snapshot(*snap);
  return snap;
}

// ---------------------------------------------------------------------------
// Serialization (input formats and the snapshot file)
// ---------------------------------------------------------------------------

inline std::string write_cases_csv(const std::vector<CaseRecord>& cases) {
  std::string out = "notification_date,postal_code,lga_code,age_band,likely_source\n";
  for (const auto& c : cases) {
    out += format_date(c.notification_date);
    out += ',' + csv::escape(c.postal_code) + ',' + csv::escape(c.community_code) + ',';
    out += to_string(c.age_band);
    out += ',' + csv::escape(c.likely_source.value_or("")) + '\n';
  }
  return out;
}

inline std::string write_profiles_csv(const ProfileMap& profiles) {
  std::string out;
  for (auto c : kProfileBaseColumns) out += std::string(c) + ',';
  for (std::size_t i = 0; i < kIndicatorNames.size(); ++i)
    out += std::string(kIndicatorNames[i]) + (i + 1 < kIndicatorNames.size() ? "," : "\n");
  for (const auto& [code, p] : profiles) {
    out += csv::escape(p.code) + ',' + csv::escape(p.name) + ',' + std::to_string(p.population) + ',' +
           format_double(p.area_km2) + ',' + std::to_string(p.aged_male_70p) + ',' +
           std::to_string(p.aged_female_70p) + ',' + std::to_string(p.lower_income) + ',' +
           std::to_string(p.lone_person);
    for (double v : p.indicators) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

inline Json boundaries_to_geojson(const BoundarySet& set) {
  Json feats = Json::array();
  for (const auto& f : set.features) {
    Json polys = Json::array();
    for (const auto& poly : f.polygons) {
      Json rings = Json::array();
      for (const auto& ring : poly) {
        Json pts = Json::array();
        for (const auto& pt : ring) pts.push_back(Json::array({pt.lon, pt.lat}));
        rings.push_back(std::move(pts));
      }
      polys.push_back(std::move(rings));
    }
    Json geom;
    if (polys.size() == 1) {
      geom = {{"type", "Polygon"}, {"coordinates", polys[0]}};
    } else {
      geom = {{"type", "MultiPolygon"}, {"coordinates", polys}};
    }
    feats.push_back({{"type", "Feature"},
                     {"properties", {{"code", f.code}, {"name", f.name}, {"level", to_string(set.level)}}},
                     {"geometry", std::move(geom)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(feats)}};
}

inline std::string write_events_jsonl(const std::vector<EventLine>& events) {
  std::string out;
  for (const auto& e : events) out += dump(Json{{"date", format_date(e.date)}, {"text", e.text}}) + '\n';
  return out;
}

inline Json snapshot_to_json(const DatasetSnapshot& s) {
  Json j;
  j["format"] = "epiportrait-snapshot/1";
  j["window"] = {format_date(s.window.start), format_date(s.window.end)};
  j["raw_case_rows"] = s.raw_case_rows;
  Json cases = Json::array();
  for (const auto& c : s.cases)
    cases.push_back(Json::array({format_date(c.notification_date), c.postal_code, c.community_code,
                                 to_string(c.age_band),
                                 c.likely_source ? Json(*c.likely_source) : Json(nullptr)}));
  j["cases"] = std::move(cases);
  Json quarantine = Json::array();
  for (const auto& q : s.quarantined) quarantine.push_back(Json::array({q.row, q.reason, q.raw}));
  j["quarantined"] = std::move(quarantine);
  Json comms = Json::array();
  for (const auto& [code, p] : s.communities) {
    Json ind = Json::object();
    for (std::size_t i = 0; i < kIndicatorNames.size(); ++i) ind[std::string(kIndicatorNames[i])] = p.indicators[i];
    comms.push_back({{"code", p.code},
                     {"name", p.name},
                     {"population", p.population},
                     {"area_km2", p.area_km2},
                     {"aged_male_70p", p.aged_male_70p},
                     {"aged_female_70p", p.aged_female_70p},
                     {"lower_income", p.lower_income},
                     {"lone_person", p.lone_person},
                     {"indicators", std::move(ind)}});
  }
  j["communities"] = std::move(comms);
  Json bounds = Json::object();
  for (const auto& [level, set] : s.boundaries) bounds[std::string(to_string(level))] = boundaries_to_geojson(set);
  j["boundaries"] = std::move(bounds);
  Json events = Json::array();
  for (const auto& e : s.events) events.push_back(Json::array({format_date(e.date), e.text}));
  j["events"] = std::move(events);
  j["quarantined_events"] = s.quarantined_events;
  return j;
}

inline std::string serialize_snapshot(const DatasetSnapshot& s) { return dump(snapshot_to_json(s)); }

// Content hash of the canonical serialization.
inline std::string snapshot_id(const DatasetSnapshot& s) { return sha256_hex(serialize_snapshot(s)); }

inline std::shared_ptr<const DatasetSnapshot> deserialize_snapshot(std::string_view text) {
  auto snap = std::make_shared<DatasetSnapshot>();
  try {
    auto j = nlohmann::json::parse(text);
    if (j.at("format") != "epiportrait-snapshot/1") throw FormatError("snapshot: unsupported format tag");
    snap->window = {parse_date(j.at("window").at(0).get<std::string>()),
                    parse_date(j.at("window").at(1).get<std::string>())};
    snap->raw_case_rows = j.at("raw_case_rows").get<std::size_t>();
    for (const auto& c : j.at("cases")) {
      CaseRecord r;
      r.notification_date = parse_date(c.at(0).get<std::string>());
      r.postal_code = c.at(1).get<std::string>();
      r.community_code = c.at(2).get<std::string>();
      auto band = parse_age_band(c.at(3).get<std::string>());
      if (!band) throw FormatError("snapshot: bad age band");
      r.age_band = *band;
      if (!c.at(4).is_null()) r.likely_source = c.at(4).get<std::string>();
      snap->cases.push_back(std::move(r));
    }
    for (const auto& q : j.at("quarantined"))
      snap->quarantined.push_back({q.at(0).get<std::size_t>(), q.at(1).get<std::string>(), q.at(2).get<std::string>()});
    for (const auto& c : j.at("communities")) {
      CommunityProfile p;
      p.code = c.at("code").get<std::string>();
      p.name = c.at("name").get<std::string>();
      p.population = c.at("population").get<std::uint64_t>();
      p.area_km2 = c.at("area_km2").get<double>();
      p.aged_male_70p = c.at("aged_male_70p").get<std::uint64_t>();
      p.aged_female_70p = c.at("aged_female_70p").get<std::uint64_t>();
      p.lower_income = c.at("lower_income").get<std::uint64_t>();
      p.lone_person = c.at("lone_person").get<std::uint64_t>();
      for (std::size_t i = 0; i < kIndicatorNames.size(); ++i)
        p.indicators[i] = c.at("indicators").at(std::string(kIndicatorNames[i])).get<double>();
      auto code = p.code;
      snap->communities.emplace(code, std::move(p));
    }
    for (const auto& [key, gj] : j.at("boundaries").items()) {
      auto level = parse_level(key);
      snap->boundaries.emplace(level, parse_boundaries(gj.dump(), level));
    }
    for (const auto& e : j.at("events"))
      snap->events.push_back({parse_date(e.at(0).get<std::string>()), e.at(1).get<std::string>()});
    snap->quarantined_events = j.at("quarantined_events").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
  validate_snapshot(*snap);
  return snap;
}

}  // namespace epiportrait
