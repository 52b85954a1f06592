#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "epiportrait/geometry.hpp"
#include "epiportrait/svg.hpp"
#include "oracles.hpp"

using namespace epiportrait;

namespace {

PortraitConfig example_cfg() {
  PortraitConfig c;
  c.base_height = 4;
  c.crown_radius = 40;
  c.core_radius = 12;
  c.scale_a = 1;
  c.scale_b = 0.05;
  c.min_arc = 0.2;
  return c;
}

CommunityProfile profile(const std::string& code, std::uint64_t pop, std::uint64_t male, std::uint64_t female,
                         std::uint64_t income, std::uint64_t lone) {
  CommunityProfile p;
  p.code = code;
  p.name = code;
  p.population = pop;
  p.area_km2 = 10;
  p.aged_male_70p = male;
  p.aged_female_70p = female;
  p.lower_income = income;
  p.lone_person = lone;
  return p;
}

}  // namespace

TEST(ProteinHeight, ZeroCasesIsBaseHeight) { EXPECT_DOUBLE_EQ(protein_height(0, example_cfg()), 4.0); }

TEST(ProteinHeight, SingleCaseDropsLogTerm) { EXPECT_DOUBLE_EQ(protein_height(1, example_cfg()), 6.0); }

TEST(ProteinHeight, HundredCasesMatchesOracle) {
  // 4 + 40 (1 + ln 100) 0.05, 40-digit evaluation
  EXPECT_NEAR(protein_height(100, example_cfg()), 15.2103403719761827, 1e-12);
}

TEST(ProteinHeight, StrictlyIncreasingAboveOne) {
  auto cfg = example_cfg();
  double prev = protein_height(1, cfg);
  for (int f = 2; f < 5000; ++f) {
    double h = protein_height(f, cfg);
    ASSERT_LT(prev, h) << f;
    prev = h;
  }
}

TEST(ProteinHeight, FractionalCountsStayAboveBaseAndMonotone) {
  auto cfg = example_cfg();
  double prev = cfg.base_height;
  for (double f = 0.01; f <= 3.0; f += 0.01) {
    double h = protein_height(f, cfg);
    ASSERT_GT(h, prev) << f;
    prev = h;
  }
  EXPECT_THROW(protein_height(-1, cfg), InvalidArgument);
}

TEST(RnaArcAngle, ZeroValueFloorsAtMinArcOverShare) { EXPECT_NEAR(rna_arc_angle(0, 1000, 2, 0.2), 0.1, 1e-15); }

TEST(RnaArcAngle, QuarterOfMaxOnHalfChannel) {
  // pi/4 + 0.1
  EXPECT_NEAR(rna_arc_angle(250, 1000, 2, 0.2), 0.88539816339744831, 1e-15);
}

TEST(RnaArcAngle, MaxValueOvershootsFullCircle) {
  // 2 pi + 0.2, kept unclamped
  EXPECT_NEAR(rna_arc_angle(1000, 1000, 1, 0.2), 6.4831853071795865, 1e-14);
}

TEST(RnaArcAngle, Errors) {
  EXPECT_THROW(rna_arc_angle(0, 0, 1, 0.2), DegenerateCategory);
  EXPECT_THROW(rna_arc_angle(5, 4, 1, 0.2), InvalidArgument);
  EXPECT_THROW(rna_arc_angle(1, 4, 3, 0.2), InvalidArgument);
}

TEST(RnaArcAngle, AffineInValue) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double max = 1 + 1000 * u(rng), n1 = max * u(rng), n2 = max * u(rng);
    const int share = 1 + (i % 2);
    const double t1 = rna_arc_angle(n1, max, share, 0.15), t2 = rna_arc_angle(n2, max, share, 0.15);
    const double mid = rna_arc_angle((n1 + n2) / 2, max, share, 0.15);
    EXPECT_NEAR(mid, (t1 + t2) / 2, 1e-12 * std::abs(mid));
  }
  EXPECT_NEAR(rna_arc_angle(0, 7, 2, 0.15), 0.075, 1e-12 * 0.075);
  const double full = std::numbers::pi + 0.075;
  EXPECT_NEAR(rna_arc_angle(7, 7, 2, 0.15), full, 1e-12 * full);
}

TEST(RnaArcLength, Examples) {
  auto cfg = example_cfg();
  EXPECT_NEAR(rna_arc_length(0.885398163, 2, cfg), 12.395574282, 1e-9);
  EXPECT_NEAR(rna_arc_length(0.1, 1, cfg), 2.8, 1e-12);
  EXPECT_EQ(rna_arc_length(0, 3, cfg), 0.0);
}

TEST(RnaArcLength, RatioIsChannelRadius) {
  auto cfg = example_cfg();
  for (int m = 1; m <= 3; ++m)
    for (double t : {0.01, 0.5, 3.0, 6.4}) EXPECT_NEAR(rna_arc_length(t, m, cfg) / t, 28.0 / m, 1e-13);
}

TEST(WaveLiteral, Examples) {
  auto cfg = example_cfg();
  EXPECT_NEAR(eq4_literal(0, 1, 3, cfg), 18.666666666666667, 1e-12);
  EXPECT_NEAR(eq4_literal(std::numbers::pi / 2, 1, 3, cfg), 9.3333333333333333, 1e-12);
  // (28/3) cos(pi/4) + 28/3, 40-digit evaluation
  EXPECT_NEAR(eq4_literal(std::numbers::pi / 4, 1, 3, cfg), 15.932996624407777, 1e-12);
}

TEST(WaveLiteral, RandomInputsAgainstMultiprecision) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  auto cfg = example_cfg();
  for (int i = 0; i < 100; ++i) {
    const double theta = 7 * u(rng), share = u(rng);
    const int m = 1 + static_cast<int>(3 * u(rng));
    auto want = oracle::wave_literal(theta, share, m, 12, 40);
    EXPECT_LE(oracle::rel_err(eq4_literal(theta, share, m, cfg), want), 1e-9);
  }
}

TEST(WavePath, StaysInsideCrownForAllChannels) {
  PortraitConfig cfg;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    const int m = 1 + i % 3, n = 1 + (i / 3) % 2;
    const double theta = rna_arc_angle(u(rng) * 10, 10, n, cfg.min_arc);
    for (const auto& [phi, r] : rna_wave_path(theta, u(rng), m, n, cfg)) {
      ASSERT_GE(r, cfg.core_radius);
      ASSERT_LE(r, cfg.crown_radius);
    }
  }
}

TEST(WavePath, SampledAtFixedStepAndClamped) {
  PortraitConfig cfg;
  const double theta = rna_arc_angle(10, 10, 2, cfg.min_arc);  // overshoots pi
  auto path = rna_wave_path(theta, 0.1, 1, 2, cfg, 0, false);
  ASSERT_EQ(path.size(), static_cast<std::size_t>(cfg.path_samples) + 1);
  EXPECT_DOUBLE_EQ(path.front().first, 0.0);
  EXPECT_NEAR(path.back().first, -std::numbers::pi, 1e-15);
  const double step = path[0].first - path[1].first;
  for (std::size_t k = 1; k < path.size(); ++k) EXPECT_NEAR(path[k - 1].first - path[k].first, step, 1e-12);
}

TEST(WavePath, LargerShareOscillatesFaster) {
  PortraitConfig cfg;
  auto count_peaks = [&](double share) {
    auto p = rna_wave_path(kTwoPi, share, 2, 1, cfg);
    int peaks = 0;
    for (std::size_t k = 1; k + 1 < p.size(); ++k)
      if (p[k].second > p[k - 1].second && p[k].second >= p[k + 1].second) ++peaks;
    return peaks;
  };
  EXPECT_LT(count_peaks(0.05), count_peaks(0.3));
}

TEST(BuildPortrait, AllZeroSeriesGivesBaseHeightBars) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"A", profile("A", 1000, 50, 60, 100, 80)}};
  auto stats = CategoryStats::from_profiles(profiles);
  CaseSeries s{"A", std::vector<std::uint64_t>(12, 0)};
  auto g = build_portrait(s, SpanRange{0, 11}, profiles["A"], stats, cfg, ChannelAssignment::defaults());
  ASSERT_EQ(g.proteins.size(), 12u);
  for (const auto& p : g.proteins) {
    EXPECT_EQ(p.kind, ProteinKind::M);
    EXPECT_EQ(p.height, cfg.base_height);
  }
}

TEST(BuildPortrait, HeightsAreElementwiseAndSegmentsTileCircle) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"A", profile("A", 20000, 500, 600, 3000, 800)},
                                                      {"B", profile("B", 40000, 900, 1000, 2000, 1600)}};
  auto stats = CategoryStats::from_profiles(profiles);
  CaseSeries s{"A", {0, 3, 17, 250, 0, 1, 9}};
  auto g = build_portrait(s, SpanRange{0, 6}, profiles["A"], stats, cfg, ChannelAssignment::defaults());
  ASSERT_EQ(g.proteins.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    auto want = oracle::bar_height(s.counts[i], cfg.base_height, cfg.crown_radius, cfg.scale_a, cfg.scale_b);
    EXPECT_LE(oracle::rel_err(g.proteins[i].height, want), 1e-12);
    EXPECT_EQ(g.proteins[i].kind, s.counts[i] == 0 ? ProteinKind::M : ProteinKind::S);
    if (s.counts[i] > 0) EXPECT_GT(g.proteins[i].height, cfg.base_height);
    EXPECT_NEAR(g.proteins[i].theta1 - g.proteins[i].theta0, kTwoPi / 7, 1e-12);
  }
  EXPECT_EQ(g.proteins.front().theta0, 0.0);
  EXPECT_EQ(g.proteins.back().theta1, kTwoPi);

  ASSERT_EQ(g.rnas.size(), 4u);
  EXPECT_EQ(g.rnas[0].category, "aged_male");
  EXPECT_EQ(g.rnas[0].channel, 1);
  EXPECT_EQ(g.rnas[0].share_n, 2);
  EXPECT_EQ(g.rnas[2].category, "lower_income");
  // A holds the lower-income maximum: theta = 2 pi + min_arc
  EXPECT_NEAR(g.rnas[2].theta, kTwoPi + cfg.min_arc, 1e-12);
  EXPECT_NEAR(g.rnas[2].freq_share, 3000.0 / 5000.0, 1e-15);
  for (const auto& r : g.rnas) {
    EXPECT_GE(r.theta, cfg.min_arc / r.share_n);
    EXPECT_NEAR(r.length, (cfg.crown_radius - cfg.core_radius) / r.channel * r.theta, 1e-12);
  }
}

TEST(BuildPortrait, WindowSelectsSpans) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"A", profile("A", 1000, 5, 6, 10, 8)}};
  auto stats = CategoryStats::from_profiles(profiles);
  CaseSeries s{"A", {1, 2, 3, 4, 5}};
  auto g = build_portrait(s, SpanRange{1, 3}, profiles["A"], stats, cfg, ChannelAssignment::defaults());
  ASSERT_EQ(g.proteins.size(), 3u);
  EXPECT_EQ(g.proteins[0].x, 1u);
  EXPECT_EQ(g.proteins[2].x, 3u);
  EXPECT_THROW(build_portrait(s, SpanRange{0, 5}, profiles["A"], stats, cfg, ChannelAssignment::defaults()),
               InvalidArgument);
}

TEST(BuildPortrait, PerCapitaModeEqualisesProportionalCommunities) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"A", profile("A", 10000, 5, 6, 10, 8)},
                                                      {"B", profile("B", 100000, 50, 60, 100, 80)}};
  auto stats = CategoryStats::from_profiles(profiles);
  CaseSeries a{"A", {0, 2, 5, 11}}, b{"B", {0, 20, 50, 110}};
  PortraitOptions per{CountMode::per_10k};
  auto pa = build_portrait(a, SpanRange{0, 3}, profiles["A"], stats, cfg, ChannelAssignment::defaults(), per);
  auto pb = build_portrait(b, SpanRange{0, 3}, profiles["B"], stats, cfg, ChannelAssignment::defaults(), per);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(pa.proteins[i].height, pb.proteins[i].height);
  auto aa = build_portrait(a, SpanRange{0, 3}, profiles["A"], stats, cfg, ChannelAssignment::defaults());
  auto ab = build_portrait(b, SpanRange{0, 3}, profiles["B"], stats, cfg, ChannelAssignment::defaults());
  EXPECT_LT(aa.proteins[3].height, ab.proteins[3].height);
}

TEST(BuildPortrait, PerCapitaRejectsZeroPopulation) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"Z", profile("Z", 0, 0, 0, 0, 0)},
                                                      {"A", profile("A", 10, 1, 1, 1, 1)}};
  auto stats = CategoryStats::from_profiles(profiles);
  CaseSeries s{"Z", {0, 0}};
  PortraitOptions per{CountMode::per_10k};
  try {
    build_portrait(s, SpanRange{0, 1}, profiles["Z"], stats, cfg, ChannelAssignment::defaults(), per);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("'Z'"), std::string::npos);
  }
}

TEST(BuildPortrait, PerCapitaHeightOrderMatchesRateOrder) {
  PortraitConfig cfg;
  std::mt19937_64 rng(9);
  std::map<std::string, CommunityProfile> profiles;
  std::map<std::string, CaseSeries> series;
  for (int i = 0; i < 40; ++i) {
    auto code = "C" + std::to_string(i);
    profiles[code] = profile(code, 1000 + rng() % 200000, 10, 10, 10, 10);
    series[code] = {code, {rng() % 3 == 0 ? 0 : rng() % 500}};
  }
  auto stats = CategoryStats::from_profiles(profiles);
  std::vector<std::pair<double, double>> rate_height;
  for (const auto& [code, p] : profiles) {
    auto g = build_portrait(series[code], SpanRange{0, 0}, p, stats, cfg, ChannelAssignment::defaults(),
                            PortraitOptions{CountMode::per_10k});
    rate_height.emplace_back(10000.0 * static_cast<double>(series[code].counts[0]) / static_cast<double>(p.population),
                             g.proteins[0].height);
  }
  for (const auto& x : rate_height)
    for (const auto& y : rate_height)
      if (x.first < y.first) EXPECT_LT(x.second, y.second);
}

TEST(ChannelAssignment, DefaultsValidateAndBadSharingRejected) {
  EXPECT_NO_THROW(ChannelAssignment::defaults().validate());
  auto bad = ChannelAssignment::defaults();
  bad.strands[1].clockwise = true;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  auto lonely = ChannelAssignment::defaults();
  lonely.strands.erase(lonely.strands.begin());
  EXPECT_THROW(lonely.validate(), InvalidArgument);
}

TEST(FilterTrigger, GraysFollowPhases) {
  PortraitConfig cfg;
  PhaseTimeline tl;
  tl.labels = {Phase::uncontrolled, Phase::restrict_controlled, Phase::eased, Phase::eased};
  auto g = build_filter_trigger(tl, SpanRange{0, 3}, cfg);
  ASSERT_EQ(g.proteins.size(), 4u);
  int dark = 0;
  for (const auto& p : g.proteins) {
    EXPECT_EQ(p.kind, ProteinKind::E);
    if (phase_color(*p.phase) == "dark_gray") ++dark;
  }
  EXPECT_EQ(dark, 1);
  ASSERT_EQ(g.rnas.size(), 3u);
  for (const auto& r : g.rnas) EXPECT_NEAR(r.path.back().first, kTwoPi, 1e-12);

  PhaseTimeline calm;
  calm.labels.assign(5, Phase::uncontrolled);
  for (const auto& p : build_filter_trigger(calm, SpanRange{0, 4}, cfg).proteins)
    EXPECT_EQ(phase_color(*p.phase), "normal_gray");
}

TEST(PortraitJson, FieldNames) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"A", profile("A", 1000, 5, 6, 10, 8)}};
  auto stats = CategoryStats::from_profiles(profiles);
  auto g = build_portrait(CaseSeries{"A", {0, 4}}, SpanRange{0, 1}, profiles["A"], stats, cfg,
                          ChannelAssignment::defaults());
  auto j = portrait_to_json(g);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"code", "label", "mode", "crown", "proteins", "rnas"}));
  EXPECT_TRUE(j["crown"].contains("rc") && j["crown"].contains("rc_prime"));
  for (const char* k : {"x", "kind", "height", "theta0", "theta1", "phase"}) EXPECT_TRUE(j["proteins"][0].contains(k));
  for (const char* k : {"category", "channel", "share_n", "theta", "length", "freq_share", "path", "color"})
    EXPECT_TRUE(j["rnas"][0].contains(k));
}

TEST(PortraitSvg, PathCountIsProteinsPlusStrands) {
  PortraitConfig cfg;
  std::map<std::string, CommunityProfile> profiles = {{"A", profile("A", 1000, 5, 6, 10, 8)}};
  auto stats = CategoryStats::from_profiles(profiles);
  auto g = build_portrait(CaseSeries{"A", {0, 4, 9, 1, 0}}, SpanRange{0, 4}, profiles["A"], stats, cfg,
                          ChannelAssignment::defaults());
  auto svg = portrait_to_svg(g);
  std::size_t paths = 0;
  for (auto pos = svg.find("<path"); pos != std::string::npos; pos = svg.find("<path", pos + 1)) ++paths;
  EXPECT_EQ(paths, g.proteins.size() + g.rnas.size());
}
