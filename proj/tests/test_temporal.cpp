#include <gtest/gtest.h>

#include "epiportrait/fixture.hpp"
#include "epiportrait/temporal.hpp"
#include "oracles.hpp"

using namespace epiportrait;

namespace {

CaseRecord at(const char* date, const char* code = "A") { return {parse_date(date), "2000", code, AgeBand::unknown, {}}; }

TimeSpanGrid weekly(const char* start, const char* end) { return build_grid(make_window(start, end), Granularity::weekly); }

}  // namespace

TEST(Grid, PaperSpanCounts) {
  EXPECT_EQ(weekly("2020-01-01", "2022-01-11").size(), 106u);
  EXPECT_EQ(build_grid(make_window("2020-01-01", "2022-01-11"), Granularity::fortnightly).size(), 53u);
  EXPECT_EQ(weekly("2020-01-01", "2021-01-05").size(), 53u);
  EXPECT_EQ(make_window("2020-01-01", "2022-01-11").days(), 742);
}

TEST(Grid, OneExactWeek) {
  auto g = weekly("2020-01-01", "2020-01-07");
  ASSERT_EQ(g.size(), 1u);
  EXPECT_FALSE(g.spans[0].partial);
}

TEST(Grid, ShortWindowIsOneFlaggedSpan) {
  auto g = build_grid(make_window("2020-01-01", "2020-01-05"), Granularity::fortnightly);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_TRUE(g.spans[0].partial);
  EXPECT_EQ(g.spans[0].end, parse_date("2020-01-05"));
}

TEST(Grid, PartitionProperty) {
  for (int days = 1; days <= 120; ++days) {
    for (auto gran : {Granularity::weekly, Granularity::fortnightly}) {
      DateRange w{parse_date("2021-03-10"), parse_date("2021-03-10") + std::chrono::days{days - 1}};
      auto g = build_grid(w, gran);
      ASSERT_EQ(g, build_grid(w, gran));
      EXPECT_EQ(g.spans.front().start, w.start);
      EXPECT_EQ(g.spans.back().end, w.end);
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(g.spans[i].index, i);
        if (i) EXPECT_EQ(g.spans[i].start, g.spans[i - 1].end + std::chrono::days{1});
        const auto len = (g.spans[i].end - g.spans[i].start).count() + 1;
        EXPECT_EQ(g.spans[i].partial, len != span_days(gran));
        if (i + 1 < g.size()) EXPECT_FALSE(g.spans[i].partial);
        for (auto d = g.spans[i].start; d <= g.spans[i].end; d += std::chrono::days{1}) EXPECT_EQ(g.span_of(d), i);
      }
    }
  }
}

TEST(Bucket, SevenDayArithmetic) {
  auto g = weekly("2020-01-01", "2020-01-31");
  auto r = bucket_cases({at("2020-01-01"), at("2020-01-07"), at("2020-01-08")}, g, BoundaryLevel::lga, {"A"});
  EXPECT_EQ(r.series.at("A").counts[0], 2u);
  EXPECT_EQ(r.series.at("A").counts[1], 1u);
  EXPECT_TRUE(r.quarantined.empty());
}

TEST(Bucket, EmptyCasesGiveZeroSeries) {
  auto g = weekly("2020-01-01", "2020-01-31");
  auto r = bucket_cases({}, g, BoundaryLevel::lga, {"A", "B"});
  ASSERT_EQ(r.series.size(), 2u);
  for (const auto& [code, s] : r.series) EXPECT_EQ(s.counts, std::vector<std::uint64_t>(g.size(), 0));
}

TEST(Bucket, OutsideWindowAndUnknownQuarantined) {
  auto g = weekly("2020-01-01", "2020-01-31");
  auto r = bucket_cases({at("2019-12-31"), at("2020-01-02", "Z"), at("2020-01-03")}, g, BoundaryLevel::lga, {"A"});
  ASSERT_EQ(r.quarantined.size(), 2u);
  EXPECT_EQ(r.quarantined[0].reason, reason::outside_window);
  EXPECT_EQ(r.quarantined[1].reason, reason::unknown_community);
  EXPECT_EQ(r.series.at("A").total(), 1u);
}

TEST(Bucket, MatchesBruteForceAndConservesMass) {
  for (std::uint64_t seed : {42u, 5u, 77u}) {
    auto snap = generate_fixture(seed, 10, 140);
    std::vector<std::string> codes;
    for (const auto& [c, p] : snap->communities) codes.push_back(c);
    for (auto gran : {Granularity::weekly, Granularity::fortnightly}) {
      auto g = build_grid(snap->window, gran);
      auto r = bucket_cases(snap->cases, g, BoundaryLevel::lga, codes);
      EXPECT_TRUE(r.quarantined.empty());
      std::uint64_t total = 0;
      for (const auto& code : codes)
        for (const auto& span : g.spans) {
          const auto want = oracle::count_cases(snap->cases, code, span.start, span.end);
          EXPECT_EQ(r.series.at(code).counts[span.index], want);
          total += r.series.at(code).counts[span.index];
        }
      EXPECT_EQ(total, snap->cases.size());
    }
  }
}

TEST(Phases, PaperKeywordExamples) {
  auto g = weekly("2021-06-01", "2021-07-12");
  std::vector<EventLine> ev = {{parse_date("2021-06-09"), "Greater Sydney lockdown extended"},
                               {parse_date("2021-06-20"), "Masks required on public transport"}};
  auto tl = classify_phases(ev, g, PhaseRules::defaults());
  EXPECT_EQ(tl.labels[0], Phase::uncontrolled);
  EXPECT_EQ(tl.labels[1], Phase::restrict_controlled);
  EXPECT_EQ(tl.labels[2], Phase::eased);
  EXPECT_EQ(tl.triggering_events[1][0].keyword, "lockdown");
  EXPECT_EQ(tl.triggering_events[2][0].keyword, "masks required");
}

TEST(Phases, NoEventsAllUncontrolled) {
  auto g = weekly("2020-01-01", "2020-03-01");
  auto tl = classify_phases({}, g, PhaseRules::defaults());
  EXPECT_EQ(tl.labels, std::vector<Phase>(g.size(), Phase::uncontrolled));
}

TEST(Phases, MostRestrictiveWinsAndCarriesForward) {
  auto g = weekly("2020-01-01", "2020-03-31");
  std::vector<EventLine> ev = {{parse_date("2020-01-15"), "Social distancing urged"},
                               {parse_date("2020-01-16"), "Curfew announced"},
                               {parse_date("2020-02-19"), "Gathering limit raised"},
                               {parse_date("2020-03-01"), "Vaccination hub opens"}};
  auto tl = classify_phases(ev, g, PhaseRules::defaults());
  const std::vector<Phase> want = {Phase::uncontrolled, Phase::uncontrolled, Phase::restrict_controlled,
                                   Phase::restrict_controlled, Phase::restrict_controlled, Phase::restrict_controlled,
                                   Phase::restrict_controlled, Phase::eased, Phase::eased, Phase::eased,
                                   Phase::eased, Phase::eased, Phase::eased};
  EXPECT_EQ(tl.labels, want);
  // "distancing" does not contain the keyword "social distance"
  ASSERT_EQ(tl.unmatched.size(), 2u);
  EXPECT_EQ(tl.unmatched[1].text, "Vaccination hub opens");
}

TEST(Phases, EmptyRulesYieldAllUncontrolled) {
  auto snap = generate_fixture(42, 10, 140);
  auto g = build_grid(snap->window, Granularity::weekly);
  auto tl = classify_phases(snap->events, g, PhaseRules{});
  EXPECT_EQ(tl.labels, std::vector<Phase>(g.size(), Phase::uncontrolled));
  EXPECT_EQ(tl.unmatched.size(), snap->events.size());
}

TEST(Phases, MatchingIsCaseInsensitive) {
  EXPECT_EQ(match_event("STAY-AT-HOME orders", PhaseRules::defaults())->first, Phase::restrict_controlled);
  EXPECT_EQ(match_event("New MASK rules", PhaseRules::defaults())->first, Phase::eased);
  EXPECT_FALSE(match_event("Weather update", PhaseRules::defaults()));
}

TEST(Phases, RulesFromJson) {
  auto r = PhaseRules::from_json(nlohmann::json::parse(R"({"eased":["Reopening"],"restrict_controlled":["Border Closed"]})"));
  EXPECT_EQ(match_event("reopening of pubs", r)->first, Phase::eased);
  EXPECT_EQ(match_event("BORDER CLOSED again", r)->first, Phase::restrict_controlled);
  EXPECT_THROW(PhaseRules::from_json(nlohmann::json::parse(R"({"eased":"x"})")), FormatError);
}
