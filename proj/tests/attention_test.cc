#include "webmeter/attention.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_support.h"
#include "webmeter/synth.h"

namespace webmeter {
namespace {

using testing::At;
using M = AttentionMethod;

const std::vector<MatchPattern>& AllUrls() {
  static const std::vector<MatchPattern> kAll = {MatchPattern::AllUrls()};
  return kAll;
}

TEST(AttentionTest, GoldenTwoTabSession) {
  const Trace trace = testing::LoadFixture("two_tabs.trace");
  const std::vector<PageVisit> visits = TrackVisits(trace, AllUrls());
  ASSERT_EQ(visits.size(), 3u);
  const auto ws = AttentionMeasure(M::kWebScience, trace, visits);
  EXPECT_EQ(ws.at(visits[0].pageId), 75'000);
  EXPECT_EQ(ws.at(visits[1].pageId), 17'000);
  EXPECT_EQ(ws.at(visits[2].pageId), 240'000);

  const auto li = AttentionMeasure(M::kLoadInterval, trace, visits);
  EXPECT_EQ(li.at(visits[0].pageId), 30'000);
  EXPECT_EQ(li.at(visits[1].pageId), 62'000);
  EXPECT_FALSE(li.at(visits[2].pageId));

  const auto dwell = AttentionMeasure(M::kDwell, trace, visits);
  EXPECT_EQ(dwell.at(visits[0].pageId), 92'000);
  EXPECT_EQ(dwell.at(visits[1].pageId), 302'000);
  EXPECT_EQ(dwell.at(visits[2].pageId), 240'000);
}

TEST(AttentionTest, IdleTimeIsNotAttention) {
  Trace trace;
  trace.participantId = "idle";
  trace.events = {At(0, BrowserStartup{0}),
                  At(0, TabOpened{TabId{1}, WindowId{1}}),
                  At(0, TabActivated{WindowId{1}, TabId{1}}),
                  At(0, WindowFocusChanged{WindowId{1}}),
                  At(0, PageLoad{TabId{1}, WindowId{1}, "https://a.example/", {}}),
                  At(0, InputActivity{}),
                  At(60'000, InputActivity{}),
                  At(70'000, WindowFocusChanged{std::nullopt}),
                  At(100'000, BrowserShutdown{})};
  const std::vector<PageVisit> visits = TrackVisits(trace, AllUrls());
  const auto all = MeasureAll(trace, visits);
  ASSERT_EQ(all.size(), 1u);
  // Active [0, 15 s) and [60 s, 70 s) while focused.
  EXPECT_EQ(all[0].Get(M::kWebScience), 25'000);
  EXPECT_EQ(all[0].Get(M::kSimple), 70'000);
  EXPECT_EQ(all[0].Get(M::kDwell), 100'000);
  EXPECT_FALSE(all[0].Get(M::kLoadInterval));

  AttentionOptions longer;
  longer.idleThresholdMs = 60'000;
  EXPECT_EQ(MeasureAll(trace, visits, longer)[0].Get(M::kWebScience), 70'000);
}

TEST(AttentionTest, LoadIntervalIsCapped) {
  Trace trace;
  trace.participantId = "cap";
  trace.events = {At(0, BrowserStartup{0}),
                  At(0, TabOpened{TabId{1}, WindowId{1}}),
                  At(0, PageLoad{TabId{1}, WindowId{1}, "https://a.example/", {}}),
                  At(kLoadIntervalCapMs + 5, PageLoad{TabId{1}, WindowId{1}, "https://b.example/", {}}),
                  At(kLoadIntervalCapMs + 10, BrowserShutdown{})};
  const std::vector<PageVisit> visits = TrackVisits(trace, AllUrls());
  EXPECT_EQ(AttentionMeasure(M::kLoadInterval, trace, visits).at(visits[0].pageId),
            kLoadIntervalCapMs);
}

TEST(AttentionTest, MatchesTickOracleOnRandomTraces) {
  std::mt19937_64 rng(314);
  for (int i = 0; i < 200; ++i) {
    const Trace trace = testing::RandomTrace(rng, 50);
    const std::vector<PageVisit> visits = TrackVisits(trace, AllUrls());
    const Millis threshold = 100 * static_cast<Millis>(1 + rng() % 300);
    AttentionOptions options;
    options.idleThresholdMs = threshold;
    const auto measured = MeasureAll(trace, visits, options);
    const auto oracle = testing::AttentionByTicks(trace, visits, threshold, 100);
    for (const VisitAttention& m : measured) {
      const testing::TickAttention& expected = oracle.at(m.pageId);
      ASSERT_EQ(m.Get(M::kWebScience), expected.webscience) << "case " << i;
      ASSERT_EQ(m.Get(M::kSimple), expected.simple) << "case " << i;
      ASSERT_EQ(m.Get(M::kDwell), expected.dwell) << "case " << i;
    }
  }
}

TEST(AttentionTest, MethodOrdering) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const Trace trace = testing::RandomTrace(rng, 120);
    const std::vector<PageVisit> visits = TrackVisits(trace, AllUrls());
    for (const VisitAttention& m : MeasureAll(trace, visits)) {
      EXPECT_GE(*m.Get(M::kWebScience), 0);
      EXPECT_LE(*m.Get(M::kWebScience), *m.Get(M::kSimple));
      EXPECT_LE(*m.Get(M::kSimple), *m.Get(M::kDwell));
      if (m.Get(M::kLoadInterval)) {
        EXPECT_GE(*m.Get(M::kLoadInterval), 0);
        EXPECT_LE(*m.Get(M::kLoadInterval), kLoadIntervalCapMs);
      }
    }
  }
}

TEST(AttentionTest, ErrorMetrics) {
  EXPECT_DOUBLE_EQ(ErrorPct(75'000, 92'000), 17'000.0 / 75'000 * 100);
  EXPECT_DOUBLE_EQ(SignedDiff(75'000, 92'000), 17'000.0 / 75'000 * 100);
  EXPECT_DOUBLE_EQ(ErrorPct(75'000, 30'000), 60);
  EXPECT_DOUBLE_EQ(SignedDiff(75'000, 30'000), -60);
  EXPECT_THROW(ErrorPct(0, 5), ZeroBaseline);
  EXPECT_THROW(SignedDiff(0, 5), ZeroBaseline);
}

TEST(AttentionTest, HistogramBins) {
  EXPECT_EQ(HistogramBin(-100), 0);
  EXPECT_EQ(HistogramBin(-100.5), 0);
  EXPECT_EQ(HistogramBin(-90.01), 0);
  EXPECT_EQ(HistogramBin(-90), 1);
  EXPECT_EQ(HistogramBin(0), 10);
  EXPECT_EQ(HistogramBin(-0.01), 9);
  EXPECT_EQ(HistogramBin(149.99), 24);
  EXPECT_EQ(HistogramBin(150), 25);
  EXPECT_EQ(HistogramBin(1e9), 25);
  EXPECT_EQ(HistogramBinLabel(0), "-100");
  EXPECT_EQ(HistogramBinLabel(10), "0");
  EXPECT_EQ(HistogramBinLabel(25), ">150");
}

TEST(AttentionTest, MedianAndUnknownMethod) {
  EXPECT_DOUBLE_EQ(Median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(Median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(ParseAttentionMethod("load_interval"), M::kLoadInterval);
  EXPECT_THROW(ParseAttentionMethod("scroll"), UnknownMethod);
}

// Statistics recounted from the raw rows with straightforward loops.
TEST(AttentionTest, StatsRecount) {
  std::vector<AttentionComparison> rows;
  std::int64_t zero = 0;
  std::int64_t visits = 0;
  for (std::uint64_t seed = 1; visits < 500; ++seed) {
    Persona persona = DefaultPersonas()[seed % 6];
    persona.sessionMinutes = 10;
    const Trace trace = GenerateSession(persona, seed);
    const std::vector<PageVisit> v = TrackVisits(trace, AllUrls());
    const ComparisonSet set = BuildComparisons(trace, v, MeasureAll(trace, v));
    rows.insert(rows.end(), set.rows.begin(), set.rows.end());
    zero += set.zeroBaselineVisits;
    visits += static_cast<std::int64_t>(v.size());
  }
  const ErrorReport report = ErrorStats(rows, {1, 10, 25}, zero);
  ASSERT_EQ(report.methods.size(), 3u);
  EXPECT_EQ(report.zeroBaselineVisits, zero);

  for (const MethodStats& stats : report.methods) {
    std::vector<double> e;
    std::vector<double> d;
    for (const AttentionComparison& r : rows) {
      if (r.method == stats.method && r.e_pct) {
        e.push_back(*r.e_pct);
        d.push_back(*r.d_pct);
      }
    }
    ASSERT_EQ(stats.visits, static_cast<std::int64_t>(e.size()));
    ASSERT_FALSE(e.empty());
    const double thresholds[] = {1, 10, 25};
    for (int k = 0; k < 3; ++k) {
      const auto n = std::count_if(e.begin(), e.end(), [&](double x) { return x >= thresholds[k]; });
      EXPECT_DOUBLE_EQ(stats.proportionAtLeast[static_cast<size_t>(k)],
                       static_cast<double>(n) / static_cast<double>(e.size()));
    }
    std::sort(e.begin(), e.end());
    const size_t n = e.size();
    const double median = n % 2 ? e[n / 2] : (e[n / 2 - 1] + e[n / 2]) / 2;
    EXPECT_DOUBLE_EQ(*stats.medianError, median);

    std::array<std::int64_t, kHistogramBins> histogram{};
    for (double x : d) {
      int bin = kHistogramBins - 1;
      for (int b = 0; b < kHistogramBins - 1; ++b) {
        const double upper = -100 + 10 * (b + 1);
        if (x < upper) {
          bin = b;
          break;
        }
      }
      ++histogram[static_cast<size_t>(bin)];
    }
    EXPECT_EQ(stats.histogram, histogram);
    std::int64_t total = 0;
    for (std::int64_t c : stats.histogram)
      total += c;
    EXPECT_EQ(total, stats.visits);
  }
  // Every visit contributes a webscience row; zero-baseline rows carry no
  // error.
  const auto ws_rows = std::count_if(rows.begin(), rows.end(),
                                     [](const auto& r) { return r.method == M::kWebScience; });
  EXPECT_EQ(ws_rows, visits);
  const auto undefined = std::count_if(rows.begin(), rows.end(), [](const auto& r) {
    return r.method == M::kWebScience && !r.e_pct;
  });
  EXPECT_EQ(undefined, zero);
}

}  // namespace
}  // namespace webmeter
