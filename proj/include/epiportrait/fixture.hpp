#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "date.hpp"
#include "error.hpp"
#include "ingest.hpp"

namespace epiportrait {

// Synthetic desk-scale inputs in exactly the on-disk formats of real data.
struct FixtureFiles {
  DateRange window;
  std::string cases_csv;
  std::string profiles_csv;
  std::string boundaries_lga;     // GeoJSON
  std::string boundaries_postal;  // GeoJSON
  std::string events_jsonl;
};

struct FixtureOptions {
  std::uint64_t seed = 42;
  std::size_t n_communities = 10;
  std::size_t n_days = 140;
  std::string start = "2020-01-01";
  double case_scale = 1.0;  // multiplies every community's daily rate
};

namespace detail {

// Bit-exact across standard libraries: only raw mt19937_64 output is used.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  std::uint64_t poisson(double lambda) {
    if (lambda <= 0) return 0;
    if (lambda < 30) {
      const double limit = std::exp(-lambda);
      std::uint64_t k = 0;
      double p = uniform();
      while (p > limit) {
        ++k;
        p *= uniform();
      }
      return k;
    }
    const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return static_cast<std::uint64_t>(std::max(0.0, std::round(lambda + std::sqrt(lambda) * z)));
  }

 private:
  std::mt19937_64 eng_;
};

inline const std::array<const char*, 40>& fixture_names() {
  static const std::array<const char*, 40> names = {
      "Sydney",      "Waverley",     "Randwick",     "Parramatta",  "Ku-ring-gai",  "Burwood",
      "Fairfield",   "Penrith",      "Blacktown",    "Woollahra",   "Bayside",      "Canterbury",
      "Liverpool",   "Campbelltown", "Camden",       "Hornsby",     "Ryde",         "Strathfield",
      "Inner West",  "Willoughby",   "Mosman",       "Lane Cove",   "Hunters Hill", "Cumberland",
      "Georges River", "Sutherland", "Wollongong",   "Shellharbour", "Kiama",       "Newcastle",
      "Maitland",    "Cessnock",     "Dubbo",        "Orange",      "Bathurst",     "Kyogle",
      "Tamworth",    "Armidale",     "Wagga Wagga",  "Albury"};
  return names;
}

inline std::string fixture_name(std::size_t i) {
  static const std::array<const char*, 4> prefix = {"", "North ", "South ", "Upper "};
  const auto& base = fixture_names();
  const std::size_t round = i / base.size();
  std::string name = std::string(prefix[round % prefix.size()]) + base[i % base.size()];
  if (round >= prefix.size()) name += " " + std::to_string(round / prefix.size() + 1);
  return name;
}

inline std::string fixture_code(std::size_t i) { return std::to_string(10050 + 50 * i); }

inline std::string fixture_postcode(std::size_t community, std::size_t half) {
  return std::to_string(2000 + 2 * community + half);
}

inline Json square_feature(const std::string& code, const std::string& name, BoundaryLevel level, double lon0,
                           double lat0, double w, double h) {
  Json ring = Json::array({Json::array({lon0, lat0}), Json::array({lon0 + w, lat0}),
                           Json::array({lon0 + w, lat0 - h}), Json::array({lon0, lat0 - h}),
                           Json::array({lon0, lat0})});
  return {{"type", "Feature"},
          {"properties", {{"code", code}, {"name", name}, {"level", to_string(level)}}},
          {"geometry", {{"type", "Polygon"}, {"coordinates", Json::array({ring})}}}};
}

}  // namespace detail

// Deterministic in `opts`. Communities tile a square grid of 0.1 degree cells
// (each split into two postal areas); daily cases follow three Gaussian waves
// scaled by population and a per-community susceptibility; event headlines
// bracket each wave with restrictive and easing keywords.
inline FixtureFiles generate_fixture_files(const FixtureOptions& opts) {
  if (opts.n_communities < 1) throw InvalidArgument("fixture: need at least one community");
  if (opts.n_days < 1) throw InvalidArgument("fixture: need at least one day");
  FixtureFiles out;
  const Date start = parse_date(opts.start);
  out.window = {start, start + std::chrono::days{static_cast<long>(opts.n_days) - 1}};
  detail::FixtureRng rng(opts.seed);

  ProfileMap profiles;
  std::vector<std::string> codes;
  std::vector<double> susceptibility, onset;
  for (std::size_t i = 0; i < opts.n_communities; ++i) {
    CommunityProfile p;
    p.code = detail::fixture_code(i);
    p.name = detail::fixture_name(i);
    const double u = rng.uniform();
    p.population = 5000 + static_cast<std::uint64_t>(u * u * 245000.0);
    p.area_km2 = std::round((2.0 + rng.uniform() * 800.0) * 100.0) / 100.0;
    const double pop = static_cast<double>(p.population);
    p.aged_male_70p = static_cast<std::uint64_t>(pop * (0.03 + 0.05 * rng.uniform()));
    p.aged_female_70p = static_cast<std::uint64_t>(pop * (0.035 + 0.055 * rng.uniform()));
    p.lower_income = static_cast<std::uint64_t>(pop * (0.10 + 0.20 * rng.uniform()));
    p.lone_person = static_cast<std::uint64_t>(pop * (0.05 + 0.10 * rng.uniform()));
    auto r2 = [&](double lo, double span) { return std::round((lo + span * rng.uniform()) * 100.0) / 100.0; };
    p.indicators = {r2(30, 15),
                    pop,
                    p.area_km2,
                    pop / p.area_km2,
                    r2(250, 400),
                    r2(1200, 1500),
                    r2(500, 600),
                    r2(1300, 1500),
                    r2(1100, 1300),
                    r2(0.9, 0.8),
                    r2(2.5, 1.3),
                    r2(0.02, 0.3)};
    codes.push_back(p.code);
    susceptibility.push_back(0.3 + 1.4 * rng.uniform());
    onset.push_back(rng.uniform() * 0.05 * static_cast<double>(opts.n_days));
    profiles.emplace(p.code, std::move(p));
  }
  out.profiles_csv = write_profiles_csv(profiles);

  // Boundaries: row-major grid starting at (150E, 33S).
  const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(opts.n_communities))));
  Json lga = Json::array(), postal = Json::array();
  for (std::size_t i = 0; i < opts.n_communities; ++i) {
    const double lon0 = 150.0 + 0.1 * static_cast<double>(i % cols);
    const double lat0 = -33.0 - 0.1 * static_cast<double>(i / cols);
    const auto& p = profiles.at(codes[i]);
    lga.push_back(detail::square_feature(p.code, p.name, BoundaryLevel::lga, lon0, lat0, 0.1, 0.1));
    for (std::size_t half = 0; half < 2; ++half) {
      auto pc = detail::fixture_postcode(i, half);
      postal.push_back(detail::square_feature(pc, pc, BoundaryLevel::postal_area, lon0 + 0.05 * half, lat0, 0.05, 0.1));
    }
  }
  out.boundaries_lga = dump(Json{{"type", "FeatureCollection"}, {"features", lga}});
  out.boundaries_postal = dump(Json{{"type", "FeatureCollection"}, {"features", postal}});

  // Waves: (centre, width, amplitude) as fractions of the window.
  const double days = static_cast<double>(opts.n_days);
  const std::array<std::array<double, 3>, 3> waves = {{{0.12, 0.03, 1.0}, {0.45, 0.06, 0.6}, {0.80, 0.10, 3.0}}};
  static const std::array<const char*, 5> sources = {"Overseas", "Local - known contact", "Local - unknown source",
                                                     "Interstate", ""};
  std::vector<CaseRecord> cases;
  for (std::size_t t = 0; t < opts.n_days; ++t) {
    const Date day = start + std::chrono::days{static_cast<long>(t)};
    for (std::size_t i = 0; i < opts.n_communities; ++i) {
      const double td = static_cast<double>(t) - onset[i];
      double rate = 0;
      for (const auto& w : waves) {
        const double width = std::max(2.0, w[1] * days);
        const double z = (td - w[0] * days) / width;
        rate += w[2] * std::exp(-0.5 * z * z);
      }
      const auto& p = profiles.at(codes[i]);
      rate *= 0.5 * opts.case_scale * susceptibility[i] * static_cast<double>(p.population) / 100000.0;
      const auto k = rng.poisson(rate);
      for (std::uint64_t c = 0; c < k; ++c) {
        CaseRecord rec;
        rec.notification_date = day;
        rec.postal_code = detail::fixture_postcode(i, rng.index(2));
        rec.community_code = p.code;
        const auto band = rng.index(kAgeBandLabels.size() + 1);
        rec.age_band = static_cast<AgeBand>(std::min(band, kAgeBandLabels.size()));
        const std::string src = sources[rng.index(sources.size())];
        if (!src.empty()) rec.likely_source = src;
        cases.push_back(std::move(rec));
      }
    }
  }
  out.cases_csv = write_cases_csv(cases);

  std::vector<EventLine> events;
  auto add_event = [&](double day, const char* text) {
    const long d = std::lround(day);
    if (d < 0 || d >= static_cast<long>(opts.n_days)) return;
    events.push_back({start + std::chrono::days{d}, text});
  };
  for (const auto& w : waves) {
    const double c = w[0] * days, width = std::max(2.0, w[1] * days);
    add_event(c - 1.5 * width, "Health officials urge residents to keep social distance");
    add_event(c - 0.5 * width, "Greater Sydney lockdown extended as cases climb");
    add_event(c + 0.5 * width, "Stay-at-home orders remain for hotspot suburbs");
    add_event(c + 1.5 * width, "Masks required on public transport as rules ease");
    add_event(c + 2.5 * width, "Vaccination hub opens in western suburbs");
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  out.events_jsonl = write_events_jsonl(events);
  return out;
}

inline std::shared_ptr<const DatasetSnapshot> snapshot_from_files(const FixtureFiles& f,
                                                                  const IngestOptions& opts = {}) {
  std::vector<BoundarySet> bounds;
  bounds.push_back(parse_boundaries(f.boundaries_lga, BoundaryLevel::lga));
  bounds.push_back(parse_boundaries(f.boundaries_postal, BoundaryLevel::postal_area));
  return build_snapshot(parse_cases(f.cases_csv, f.window, opts.exclusions), parse_profiles(f.profiles_csv),
                        std::move(bounds), parse_events(f.events_jsonl, f.window), f.window, opts);
}

inline std::shared_ptr<const DatasetSnapshot> generate_fixture(std::uint64_t seed, std::size_t n_communities,
                                                               std::size_t n_days) {
  FixtureOptions o;
  o.seed = seed;
  o.n_communities = n_communities;
  o.n_days = n_days;
  return snapshot_from_files(generate_fixture_files(o));
}

struct CorruptedCases {
  std::string csv;
  std::vector<std::size_t> rows;  // 1-based data rows whose date was broken
};

// Replaces the notification date of `count` distinct data rows with an
// unparseable value. Row selection is seeded.
inline CorruptedCases corrupt_case_dates(std::string_view csv_text, std::size_t count, std::uint64_t seed) {
  auto lines = csv::lines(csv_text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("corrupt_case_dates: missing header");
  const std::size_t rows = lines.size() - 1;
  if (count > rows) throw InvalidArgument("corrupt_case_dates: more corruptions than rows");
  detail::FixtureRng rng(seed);
  std::set<std::size_t> chosen;
  while (chosen.size() < count) chosen.insert(1 + rng.index(rows));
  static const std::array<const char*, 4> broken = {"2020-13-01", "2020-02-30", "not-a-date", "20200105"};
  CorruptedCases out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line(lines[i]);
    if (chosen.count(i)) line = broken[rng.index(broken.size())] + line.substr(line.find(','));
    out.csv += line + '\n';
  }
  out.rows.assign(chosen.begin(), chosen.end());
  return out;
}

}  // namespace epiportrait
