#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "ingest.hpp"
#include "layout.hpp"
#include "temporal.hpp"

namespace epiportrait {

// Immutable query surface over one snapshot. All derived tables (grids,
// per-level series, phase timelines) are computed once at construction, so
// every query is a read-only function of (snapshot, config, arguments).
class Engine {
 public:
  Engine(std::shared_ptr<const DatasetSnapshot> snapshot, Config config)
      : snap_(std::move(snapshot)), cfg_(std::move(config)), id_(snapshot_id(*snap_)) {
    cfg_.portrait.validate();
    cfg_.channels.validate();
    stats_ = CategoryStats::from_profiles(snap_->communities);

    std::vector<std::string> lga_codes;
    for (const auto& [code, p] : snap_->communities) {
      lga_codes.push_back(code);
      candidates_[0].push_back({code, p.name});
    }
    std::set<std::string> postal;
    if (auto it = snap_->boundaries.find(BoundaryLevel::postal_area); it != snap_->boundaries.end()) {
      for (const auto& f : it->second.features) {
        postal.insert(f.code);
        candidates_[1].push_back({f.code, f.name.empty() ? f.code : f.name});
      }
    } else {
      for (const auto& c : snap_->cases) postal.insert(c.postal_code);
      for (const auto& code : postal) candidates_[1].push_back({code, code});
    }
    std::vector<std::string> postal_codes(postal.begin(), postal.end());

    for (auto g : {Granularity::weekly, Granularity::fortnightly}) {
      const auto gi = static_cast<std::size_t>(g);
      grids_[gi] = build_grid(snap_->window, g);
      series_[0][gi] = bucket_cases(snap_->cases, grids_[gi], BoundaryLevel::lga, lga_codes).series;
      auto postal_bucket = bucket_cases(snap_->cases, grids_[gi], BoundaryLevel::postal_area, postal_codes);
      series_[1][gi] = std::move(postal_bucket.series);
      postal_unmatched_ = postal_bucket.quarantined.size();
      phases_[gi] = classify_phases(snap_->events, grids_[gi], cfg_.rules);
    }
  }

  const DatasetSnapshot& snapshot() const { return *snap_; }
  const std::string& id() const { return id_; }
  const Config& config() const { return cfg_; }
  const CategoryStats& category_stats() const { return stats_; }

  const TimeSpanGrid& grid(Granularity g) const { return grids_[static_cast<std::size_t>(g)]; }
  const SeriesMap& series(BoundaryLevel l, Granularity g) const {
    return series_[static_cast<std::size_t>(l)][static_cast<std::size_t>(g)];
  }
  const PhaseTimeline& phases(Granularity g) const { return phases_[static_cast<std::size_t>(g)]; }

  // Full grid when `range` is unset; validated against the grid otherwise.
  SpanRange resolve(Granularity g, std::optional<SpanRange> range) const {
    if (!range) return SpanRange::full(grid(g));
    check_range(*range, grid(g));
    return *range;
  }

  PortraitGeometry portrait(const std::string& code, Granularity g, CountMode mode, const SpanRange& r) const {
    auto it = snap_->communities.find(code);
    if (it == snap_->communities.end()) throw NotFound("no community '" + code + "'");
    PortraitOptions opts{mode, cfg_.per_capita_divisor, &phases(g)};
    return build_portrait(series(BoundaryLevel::lga, g).at(code), r, it->second, stats_, cfg_.portrait,
                          cfg_.channels, opts);
  }

  std::vector<PortraitGeometry> portraits(Granularity g, CountMode mode, const SpanRange& r) const {
    std::vector<PortraitGeometry> out;
    for (const auto& [code, p] : snap_->communities) out.push_back(portrait(code, g, mode, r));
    return out;
  }

  PortraitGeometry filter_trigger(Granularity g, const SpanRange& r) const {
    return build_filter_trigger(phases(g), r, cfg_.portrait);
  }

  struct Pin {
    std::string code;
    Vec2 at;
  };

  // Collision radius per portrait is R'_c plus its tallest bar.
  LayoutResult layout(Granularity g, CountMode mode, const SpanRange& r, std::uint64_t seed, Viewport vp,
                      const std::vector<Pin>& pins) const {
    std::vector<LayoutBody> bodies;
    for (const auto& p : portraits(g, mode, r)) {
      LayoutBody b;
      b.code = p.code;
      b.radius = p.crown_radius + p.max_height();
      bodies.push_back(std::move(b));
    }
    for (const auto& pn : pins) bodies = pin(std::move(bodies), pn.code, pn.at);
    auto params = cfg_.layout;
    params.seed = seed;
    return run_layout(std::move(bodies), vp, params);
  }

  RankedList rankings(std::string_view metric, Granularity g, const SpanRange& r) const {
    return rank_by(metric, snap_->communities, series(BoundaryLevel::lga, g), r, cfg_.per_capita_divisor);
  }

  HeatmapFrame heatmap_frame(BoundaryLevel l, Granularity g, const SpanRange& r) const {
    return heatmap(series(l, g), r);
  }

  MdcDataset mdc(Granularity g, const SpanRange& r) const {
    return mdc_dataset(snap_->communities, series(BoundaryLevel::lga, g), r);
  }

  std::vector<SearchHit> find(std::string_view query, BoundaryLevel l) const {
    return search(query, candidates_[static_cast<std::size_t>(l)]);
  }

  Json summary() const {
    std::map<std::string, std::size_t> reasons;
    for (const auto& q : snap_->quarantined) ++reasons[q.reason];
    Json rj = Json::object();
    for (const auto& [k, v] : reasons) rj[k] = v;
    std::size_t postal_areas = 0;
    if (auto it = snap_->boundaries.find(BoundaryLevel::postal_area); it != snap_->boundaries.end())
      postal_areas = it->second.features.size();
    return {{"snapshot", id_},
            {"window", {format_date(snap_->window.start), format_date(snap_->window.end)}},
            {"case_rows", snap_->raw_case_rows},
            {"accepted", snap_->cases.size()},
            {"quarantined", snap_->quarantined.size()},
            {"quarantine_reasons", std::move(rj)},
            {"communities", snap_->communities.size()},
            {"postal_areas", postal_areas},
            {"postal_unmatched", postal_unmatched_},
            {"events", snap_->events.size()},
            {"events_quarantined", snap_->quarantined_events},
            {"weekly_spans", grid(Granularity::weekly).size()},
            {"fortnightly_spans", grid(Granularity::fortnightly).size()}};
  }

 private:
  std::shared_ptr<const DatasetSnapshot> snap_;
  Config cfg_;
  std::string id_;
  CategoryStats stats_;
  std::array<TimeSpanGrid, 2> grids_;
  std::array<std::array<SeriesMap, 2>, 2> series_;  // [level][granularity]
  std::array<PhaseTimeline, 2> phases_;
  std::array<std::vector<SearchHit>, 2> candidates_;
  std::size_t postal_unmatched_ = 0;
};

}  // namespace epiportrait
