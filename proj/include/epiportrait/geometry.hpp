#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "json_format.hpp"
#include "temporal.hpp"

namespace epiportrait {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Rendering parameters of a portrait. Angles are radians measured clockwise
// from the top of the crown.
struct PortraitConfig {
  double core_radius = 12.0;     // R_c
  double crown_radius = 40.0;    // R'_c
  double base_height = 4.0;      // h, height of a zero-case bar
  double scale_a = 1.0;
  double scale_b = 0.05;
  double min_arc = 0.15;         // θ, floor of every RNA arc
  double wave_count = 24.0;      // W, cosine frequency multiplier
  double amplitude_factor = 0.8; // α
  int path_samples = 256;        // angular steps per RNA strand

  double channel_span() const { return crown_radius - core_radius; }

  void validate() const {
    if (!(core_radius > 0) || !(crown_radius > core_radius))
      throw InvalidArgument("portrait config: need crown_radius > core_radius > 0");
    if (!(base_height > 0)) throw InvalidArgument("portrait config: base_height must be positive");
    if (!(scale_a >= 0) || !(scale_b > 0)) throw InvalidArgument("portrait config: need a >= 0, b > 0");
    if (!(min_arc > 0)) throw InvalidArgument("portrait config: min_arc must be positive");
    if (!(wave_count >= 1)) throw InvalidArgument("portrait config: wave_count must be >= 1");
    if (!(amplitude_factor > 0 && amplitude_factor <= 1))
      throw InvalidArgument("portrait config: amplitude_factor must lie in (0, 1]");
    if (path_samples < 1) throw InvalidArgument("portrait config: path_samples must be >= 1");
  }

  static PortraitConfig from_json(const nlohmann::json& j) {
    PortraitConfig c;
    auto get = [&](const char* key, double& dst) {
      if (j.contains(key)) dst = j[key].get<double>();
    };
    get("core_radius", c.core_radius);
    get("crown_radius", c.crown_radius);
    get("base_height", c.base_height);
    get("scale_a", c.scale_a);
    get("scale_b", c.scale_b);
    get("min_arc", c.min_arc);
    get("wave_count", c.wave_count);
    get("amplitude_factor", c.amplitude_factor);
    if (j.contains("path_samples")) c.path_samples = j["path_samples"].get<int>();
    c.validate();
    return c;
  }
};

// One RNA strand's placement inside the crown.
struct StrandPlacement {
  KeyFactor category;
  int channel = 1;  // m: 1 outermost .. 3 innermost
  int share = 1;    // n: 1 full channel, 2 half channel
  std::string color;
  double origin = 0;  // start angle
  bool clockwise = true;
};

struct ChannelAssignment {
  std::vector<StrandPlacement> strands;

  static ChannelAssignment defaults() {
    return {{{KeyFactor::aged_male, 1, 2, "azure_blue", 0.0, true},
             {KeyFactor::aged_female, 1, 2, "mint_pink", 0.0, false},
             {KeyFactor::lower_income, 2, 1, "gold_yellow", 0.0, true},
             {KeyFactor::lone_person, 3, 1, "pale_purple", 0.0, true}}};
  }

  // Shared channels host exactly two strands running in opposite directions;
  // unshared channels host one.
  void validate() const {
    for (int m = 1; m <= 3; ++m) {
      std::vector<const StrandPlacement*> in;
      for (const auto& s : strands) {
        if (s.channel < 1 || s.channel > 3) throw InvalidArgument("channel must be 1, 2 or 3");
        if (s.share != 1 && s.share != 2) throw InvalidArgument("channel share must be 1 or 2");
        if (s.channel == m) in.push_back(&s);
      }
      if (in.empty()) continue;
      if (in.front()->share == 1 && in.size() != 1)
        throw InvalidArgument("full channel " + std::to_string(m) + " must host exactly one strand");
      if (in.front()->share == 2) {
        if (in.size() != 2 || in[1]->share != 2)
          throw InvalidArgument("half channel " + std::to_string(m) + " must host exactly two strands");
        if (in[0]->origin == in[1]->origin && in[0]->clockwise == in[1]->clockwise)
          throw InvalidArgument("strands sharing channel " + std::to_string(m) + " overlap");
      }
    }
  }
};

enum class CountMode : std::uint8_t { actual, per_10k };

inline std::string_view to_string(CountMode m) { return m == CountMode::actual ? "actual" : "per_10k"; }

inline CountMode parse_mode(std::string_view s) {
  if (s == "actual") return CountMode::actual;
  if (s == "per_10k") return CountMode::per_10k;
  throw InvalidArgument("unknown mode '" + std::string(s) + "'");
}

enum class ProteinKind : std::uint8_t { S, M, E };

inline std::string_view to_string(ProteinKind k) {
  switch (k) {
    case ProteinKind::S: return "S";
    case ProteinKind::M: return "M";
    case ProteinKind::E: return "E";
  }
  return "";
}

struct ProteinGlyph {
  std::size_t x = 0;  // absolute span index
  ProteinKind kind = ProteinKind::M;
  double height = 0;
  double theta0 = 0;
  double theta1 = 0;
  std::optional<Phase> phase;
  double value = 0;  // f(x) after mode scaling
};

struct RnaGlyph {
  std::string category;
  std::string community;
  int channel = 1;
  int share_n = 1;
  double theta = 0;  // unclamped arc angle
  double length = 0;
  double freq_share = 0;
  std::vector<std::pair<double, double>> path;  // (absolute angle, radius)
  std::string color;
};

struct PortraitGeometry {
  std::string code;
  std::string label;
  CountMode mode = CountMode::actual;
  double core_radius = 0;
  double crown_radius = 0;
  std::vector<ProteinGlyph> proteins;
  std::vector<RnaGlyph> rnas;

  double max_height() const {
    double h = 0;
    for (const auto& p : proteins) h = std::max(h, p.height);
    return h;
  }
};

// ---------------------------------------------------------------------------
// Crown equations
// ---------------------------------------------------------------------------

// Bar height for f cases in a span: h for zero, h + R'_c (a + ln f) b for
// f >= 1. Fractional f in (0, 1) (per-capita mode only) uses the linear
// continuation h + R'_c a b f so heights stay above h and monotone.
inline double protein_height(double f, const PortraitConfig& cfg) {
  if (!(f >= 0)) throw InvalidArgument("protein_height: negative case count");
  if (f == 0) return cfg.base_height;
  if (f < 1) return cfg.base_height + cfg.crown_radius * cfg.scale_a * cfg.scale_b * f;
  return cfg.base_height + cfg.crown_radius * (cfg.scale_a + std::log(f)) * cfg.scale_b;
}

// Θ = (N / max) (2π / n) + θ / n.
inline double rna_arc_angle(double value, double max_value, int share, double min_arc) {
  if (!(max_value > 0)) throw DegenerateCategory("rna_arc_angle: category maximum is zero");
  if (share != 1 && share != 2) throw InvalidArgument("rna_arc_angle: share must be 1 or 2");
  if (value < 0 || value > max_value) throw InvalidArgument("rna_arc_angle: value outside [0, max]");
  return value / max_value * (kTwoPi / share) + min_arc / share;
}

// L = ((R'_c - R_c) / m) Θ.
inline double rna_arc_length(double theta, int channel, const PortraitConfig& cfg) {
  if (channel < 1 || channel > 3) throw InvalidArgument("rna_arc_length: channel must be 1..3");
  return cfg.channel_span() / channel * theta;
}

// Cosine-wave radius evaluated literally at the arc angle:
// ((R'_c - R_c) / 3) |cos(Θ s)| + (R'_c - R_c) / m, where s = N / sum.
inline double eq4_literal(double theta, double share_of_sum, int channel, const PortraitConfig& cfg) {
  if (channel < 1 || channel > 3) throw InvalidArgument("eq4_literal: channel must be 1..3");
  return cfg.channel_span() / 3.0 * std::abs(std::cos(theta * share_of_sum)) + cfg.channel_span() / channel;
}

// Drawn radius at running angle phi along a strand. The wave peaks at the
// channel's base radius R_c + (R'_c - R_c)/m and dips by at most α (R'_c - R_c)/3,
// so every channel stays inside [R_c, R'_c].
inline double wave_radius(double phi, double freq_share, int channel, const PortraitConfig& cfg) {
  const double amp = cfg.amplitude_factor * cfg.channel_span() / 3.0;
  return cfg.core_radius + cfg.channel_span() / channel - amp +
         amp * std::abs(std::cos(phi * cfg.wave_count * freq_share));
}

// Samples a strand from `origin`, sweeping min(Θ, 2π/n) in the given
// direction at a fixed angular step. Points carry absolute angles.
inline std::vector<std::pair<double, double>> rna_wave_path(double theta, double freq_share, int channel, int share,
                                                            const PortraitConfig& cfg, double origin = 0,
                                                            bool clockwise = true) {
  const double extent = std::min(theta, kTwoPi / share);
  const int n = cfg.path_samples;
  const double step = extent / n;
  const double dir = clockwise ? 1.0 : -1.0;
  std::vector<std::pair<double, double>> path;
  path.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double phi = k == n ? extent : step * k;
    path.emplace_back(origin + dir * phi, wave_radius(phi, freq_share, channel, cfg));
  }
  return path;
}

// Per-category maximum and sum of each key factor over all communities.
struct CategoryStats {
  std::array<double, 4> max{};
  std::array<double, 4> sum{};

  static CategoryStats from_profiles(const ProfileMap& profiles) {
    CategoryStats s;
    for (const auto& [code, p] : profiles)
      for (std::size_t i = 0; i < kKeyFactors.size(); ++i) {
        const double v = static_cast<double>(p.key_factor(kKeyFactors[i]));
        s.max[i] = std::max(s.max[i], v);
        s.sum[i] += v;
      }
    return s;
  }
};

// f(x) under the chosen mode.
inline double scaled_count(std::uint64_t count, CountMode mode, const CommunityProfile& profile,
                           double per_capita_divisor = 10000.0) {
  if (mode == CountMode::actual) return static_cast<double>(count);
  if (profile.population == 0)
    throw InvalidArgument("per-capita mode: community '" + profile.code + "' has zero population");
  return per_capita_divisor * static_cast<double>(count) / static_cast<double>(profile.population);
}

struct PortraitOptions {
  CountMode mode = CountMode::actual;
  double per_capita_divisor = 10000.0;
  const PhaseTimeline* phases = nullptr;  // annotates proteins when set
};

// Assembles one community's portrait over the spans in `window`: one bar per
// span tiling the full circle, plus one RNA strand per placement.
inline PortraitGeometry build_portrait(const CaseSeries& series, const SpanRange& window,
                                       const CommunityProfile& profile, const CategoryStats& stats,
                                       const PortraitConfig& cfg, const ChannelAssignment& channels,
                                       const PortraitOptions& opts = {}) {
  if (!window.empty() && window.to >= series.counts.size())
    throw InvalidArgument("build_portrait: window exceeds series length");
  if (opts.mode == CountMode::per_10k && profile.population == 0)
    throw InvalidArgument("per-capita mode: community '" + profile.code + "' has zero population");

  PortraitGeometry g;
  g.code = profile.code;
  g.label = profile.name;
  g.mode = opts.mode;
  g.core_radius = cfg.core_radius;
  g.crown_radius = cfg.crown_radius;

  const double width = window.size() ? kTwoPi / static_cast<double>(window.size()) : 0;
  for (std::size_t k = 0; k < window.size(); ++k) {
    const std::size_t x = window.from + k;
    const auto count = series.counts[x];
    ProteinGlyph p;
    p.x = x;
    p.value = scaled_count(count, opts.mode, profile, opts.per_capita_divisor);
    p.kind = count == 0 ? ProteinKind::M : ProteinKind::S;
    p.height = protein_height(p.value, cfg);
    p.theta0 = width * static_cast<double>(k);
    p.theta1 = k + 1 == window.size() ? kTwoPi : width * static_cast<double>(k + 1);
    if (opts.phases && x < opts.phases->labels.size()) p.phase = opts.phases->labels[x];
    g.proteins.push_back(p);
  }

  for (const auto& s : channels.strands) {
    const auto idx = static_cast<std::size_t>(s.category);
    const double value = static_cast<double>(profile.key_factor(s.category));
    RnaGlyph r;
    r.category = to_string(s.category);
    r.community = profile.code;
    r.channel = s.channel;
    r.share_n = s.share;
    r.theta = rna_arc_angle(value, stats.max[idx], s.share, cfg.min_arc);
    r.length = rna_arc_length(r.theta, s.channel, cfg);
    r.freq_share = stats.sum[idx] > 0 ? value / stats.sum[idx] : 0;
    r.path = rna_wave_path(r.theta, r.freq_share, s.channel, s.share, cfg, s.origin, s.clockwise);
    r.color = s.color;
    g.rnas.push_back(std::move(r));
  }
  return g;
}

// Control-panel sample portrait: one grayscale E bar per span, darker for
// more restrictive phases, and three full-circle indicator strands.
inline PortraitGeometry build_filter_trigger(const PhaseTimeline& phases, const SpanRange& window,
                                             const PortraitConfig& cfg) {
  if (!window.empty() && window.to >= phases.labels.size())
    throw InvalidArgument("build_filter_trigger: window exceeds timeline");
  PortraitGeometry g;
  g.code = "filter_trigger";
  g.label = "Filter trigger";
  g.core_radius = cfg.core_radius;
  g.crown_radius = cfg.crown_radius;
  const double width = window.size() ? kTwoPi / static_cast<double>(window.size()) : 0;
  for (std::size_t k = 0; k < window.size(); ++k) {
    ProteinGlyph p;
    p.x = window.from + k;
    p.kind = ProteinKind::E;
    p.height = cfg.base_height;
    p.theta0 = width * static_cast<double>(k);
    p.theta1 = k + 1 == window.size() ? kTwoPi : width * static_cast<double>(k + 1);
    p.phase = phases.labels[p.x];
    g.proteins.push_back(p);
  }
  const std::array<std::pair<const char*, const char*>, 3> indicators = {
      {{"aged", "azure_blue"}, {"lower_income", "gold_yellow"}, {"lone_person", "pale_purple"}}};
  for (int m = 1; m <= 3; ++m) {
    RnaGlyph r;
    r.category = indicators[m - 1].first;
    r.community = g.code;
    r.channel = m;
    r.share_n = 1;
    r.theta = kTwoPi;
    r.length = rna_arc_length(r.theta, m, cfg);
    r.freq_share = 1.0;
    r.path = rna_wave_path(r.theta, r.freq_share, m, 1, cfg);
    r.color = indicators[m - 1].second;
    g.rnas.push_back(std::move(r));
  }
  return g;
}

// Grayscale class of an E bar.
inline std::string_view phase_color(Phase p) {
  switch (p) {
    case Phase::uncontrolled: return "normal_gray";
    case Phase::eased: return "silver_gray";
    case Phase::restrict_controlled: return "dark_gray";
  }
  return "";
}

inline Json portrait_to_json(const PortraitGeometry& g) {
  Json proteins = Json::array();
  for (const auto& p : g.proteins)
    proteins.push_back({{"x", p.x},
                        {"kind", to_string(p.kind)},
                        {"height", p.height},
                        {"theta0", p.theta0},
                        {"theta1", p.theta1},
                        {"phase", p.phase ? Json(to_string(*p.phase)) : Json(nullptr)}});
  Json rnas = Json::array();
  for (const auto& r : g.rnas) {
    Json path = Json::array();
    for (const auto& [phi, rad] : r.path) path.push_back(Json::array({phi, rad}));
    rnas.push_back({{"category", r.category},
                    {"channel", r.channel},
                    {"share_n", r.share_n},
                    {"theta", r.theta},
                    {"length", r.length},
                    {"freq_share", r.freq_share},
                    {"path", std::move(path)},
                    {"color", r.color}});
  }
  return {{"code", g.code},
          {"label", g.label},
          {"mode", to_string(g.mode)},
          {"crown", {{"rc", g.core_radius}, {"rc_prime", g.crown_radius}}},
          {"proteins", std::move(proteins)},
          {"rnas", std::move(rnas)}};
}

}  // namespace epiportrait
