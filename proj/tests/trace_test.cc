#include "webmeter/trace.h"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_support.h"

namespace webmeter {
namespace {

using testing::At;

constexpr char kHeader[] = R"({"formatVersion":1,"participantId":"x","ageGroup":"unknown"})";

std::string Lines(std::initializer_list<std::string> lines) {
  std::string out = std::string(kHeader) + "\n";
  for (const std::string& line : lines)
    out += line + "\n";
  return out;
}

Trace Minimal() {
  Trace trace;
  trace.participantId = "p";
  trace.events = {At(0, BrowserStartup{1000}), At(10, BrowserShutdown{})};
  return trace;
}

int LineCount(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

TEST(TraceTest, MinimalSessionIsThreeLines) {
  const std::string text = SerializeTrace(Minimal());
  EXPECT_EQ(LineCount(text), 3);
  EXPECT_EQ(ParseTrace(text), Minimal());
}

TEST(TraceTest, RoundTripsRandomTraces) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    Trace trace = testing::RandomTrace(rng, 10 + static_cast<int>(rng() % 120));
    if (i % 3 == 0)
      trace.generator = "test seed=" + std::to_string(i);
    ASSERT_TRUE(ValidateTrace(trace).empty()) << "case " << i;
    const std::string text = SerializeTrace(trace);
    const Trace parsed = ParseTrace(text);
    ASSERT_EQ(parsed, trace) << "case " << i;
    EXPECT_EQ(SerializeTrace(parsed), text);
    EXPECT_EQ(LineCount(text), static_cast<int>(trace.events.size()) + 1);
  }
}

TEST(TraceTest, OutOfOrderReportsLine) {
  const std::string text = Lines({R"({"t":0,"kind":"BrowserStartup","systemClockMs":5})",
                                  R"({"t":100,"kind":"InputActivity"})",
                                  R"({"t":50,"kind":"InputActivity"})",
                                  R"({"t":200,"kind":"BrowserShutdown"})"});
  try {
    ParseTrace(text);
    FAIL() << "expected a parse error";
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.kind(), TraceParseError::Kind::kOutOfOrderTimestamp);
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(TraceTest, DanglingReferenceNamesId) {
  const std::string text = Lines({R"({"t":0,"kind":"BrowserStartup","systemClockMs":5})",
                                  R"({"t":5,"kind":"TabActivated","windowId":1,"tabId":9})",
                                  R"({"t":6,"kind":"BrowserShutdown"})"});
  try {
    ParseTrace(text);
    FAIL() << "expected a parse error";
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.kind(), TraceParseError::Kind::kDanglingReference);
    EXPECT_EQ(e.line(), 3);
    EXPECT_TRUE(e.id().has_value());
  }
}

TEST(TraceTest, MalformedRecords) {
  const std::string startup = R"({"t":0,"kind":"BrowserStartup","systemClockMs":5})";
  const std::string bad[] = {
      Lines({startup, "not json"}),
      Lines({startup, R"({"t":1,"kind":"Teleport"})"}),
      Lines({startup, R"({"t":1,"kind":"InputActivity","extra":1})"}),
      Lines({startup, R"({"t":"1","kind":"InputActivity"})"}),
      Lines({startup, R"({"t":1,"kind":"ScrollPosition","tabId":1})"}),
      Lines({startup, ""}),
  };
  for (const std::string& text : bad) {
    try {
      DecodeTrace(text);
      FAIL() << text;
    } catch (const TraceParseError& e) {
      EXPECT_EQ(e.kind(), TraceParseError::Kind::kMalformedRecord) << text;
      EXPECT_EQ(e.line(), 3) << text;
    }
  }
  EXPECT_THROW(DecodeTrace(""), TraceParseError);
  EXPECT_THROW(DecodeTrace(R"({"formatVersion":2,"participantId":"x","ageGroup":"65+"})"),
               TraceParseError);
}

std::vector<ViolationRule> Rules(const Trace& trace) {
  std::vector<ViolationRule> rules;
  for (const Violation& v : ValidateTrace(trace))
    rules.push_back(v.rule);
  return rules;
}

TEST(TraceTest, ValidationRules) {
  using R = ViolationRule;
  Trace t = Minimal();
  t.events.erase(t.events.begin());
  EXPECT_EQ(Rules(t), std::vector<R>{R::kMissingStartup});

  t = Minimal();
  t.events.pop_back();
  EXPECT_EQ(Rules(t), std::vector<R>{R::kUnterminatedSession});

  t = Minimal();
  t.events.push_back(At(20, InputActivity{}));
  EXPECT_EQ(Rules(t), std::vector<R>{R::kEventAfterShutdown});

  t = Minimal();
  t.events.insert(t.events.begin() + 1, At(5, BrowserStartup{}));
  EXPECT_EQ(Rules(t), std::vector<R>{R::kDuplicateStartup});

  t = Minimal();
  t.events.insert(t.events.begin() + 1, {At(1, TabOpened{TabId{1}, WindowId{1}}),
                                         At(2, TabOpened{TabId{1}, WindowId{1}}),
                                         At(3, TabOpened{TabId{2}, WindowId{2}}),
                                         At(4, TabActivated{WindowId{1}, TabId{2}}),
                                         At(5, ScrollPosition{TabId{1}, 101}),
                                         At(6, LinkVisible{TabId{1}, "https://a.example/", -1}),
                                         At(7, PageLoad{TabId{1}, WindowId{1}, "nope", {}})});
  EXPECT_EQ(Rules(t), (std::vector<R>{R::kDuplicateId, R::kTabWindowMismatch,
                                      R::kDepthOutOfRange, R::kNegativeArea,
                                      R::kInvalidUrl}));

  t = Minimal();
  t.events.front().t = -5;
  EXPECT_EQ(Rules(t), std::vector<R>{R::kNegativeTimestamp});
}

TEST(TraceTest, ClosedWindowDropsItsTabs) {
  Trace t = Minimal();
  t.events.insert(t.events.begin() + 1, {At(1, TabOpened{TabId{1}, WindowId{1}}),
                                         At(2, WindowClosed{WindowId{1}}),
                                         At(3, ScrollPosition{TabId{1}, 10})});
  const auto violations = ValidateTrace(t);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, ViolationRule::kDanglingReference);
  EXPECT_EQ(violations[0].eventIndex, 3u);
  EXPECT_EQ(violations[0].id, 1);
}

}  // namespace
}  // namespace webmeter
