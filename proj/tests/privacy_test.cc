#include "webmeter/privacy.h"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "panel.h"
#include "test_support.h"

namespace webmeter {
namespace {

namespace fs = std::filesystem;

constexpr char kSchemaJson[] = R"({
  "studyId": "news-2021",
  "fields": [
    {"name": "visits.news", "valueType": "count", "riskLabel": "low"},
    {"name": "topCategory", "valueType": "category", "riskLabel": "medium"},
    {"name": "firstVisitHour", "valueType": "timestamp-bucket", "riskLabel": "high"}
  ]
})";

StudySchema Schema() { return ParseSchema(kSchemaJson); }

TEST(AggregateTest, CountsPartitionTheInput) {
  const std::vector<int> none;
  EXPECT_TRUE(Aggregate(std::span<const int>(none), [](int) { return "x"; }).empty());
  const std::vector<int> ten(10, 1);
  EXPECT_EQ(Aggregate(std::span<const int>(ten), [](int) { return "c"; }),
            (std::map<std::string, std::int64_t>{{"c", 10}}));

  std::mt19937_64 rng(1);
  for (int round = 0; round < 50; ++round) {
    std::vector<int> records(rng() % 2000);
    for (int& r : records)
      r = static_cast<int>(rng() % 13);
    const auto counts = Aggregate(std::span<const int>(records),
                                  [](int r) { return "c" + std::to_string(r % 7); });
    std::int64_t sum = 0;
    for (const auto& [label, n] : counts) {
      std::int64_t recount = 0;
      for (int r : records)
        recount += ("c" + std::to_string(r % 7)) == label;
      EXPECT_EQ(n, recount);
      sum += n;
    }
    EXPECT_EQ(sum, static_cast<std::int64_t>(records.size()));
  }
}

TEST(WindowTest, EpochAligned) {
  EXPECT_EQ(WindowContaining(0, 100), (Window{0, 100}));
  EXPECT_EQ(WindowContaining(99, 100), (Window{0, 100}));
  EXPECT_EQ(WindowContaining(100, 100), (Window{100, 200}));
  EXPECT_EQ(WindowContaining(-1, 100), (Window{-100, 0}));
  EXPECT_EQ(WindowContaining(kDayMs * 8).start, kDefaultAggregationWindowMs);
}

TEST(PseudoIdTest, KeyedDerivation) {
  // Independently computed HMAC-SHA256("Jefe", "webmeter-study-id:news-2021").
  EXPECT_EQ(PseudoId("news-2021", "Jefe"),
            "4fd641373a4fa449a7e610f58c8d3c98353eef89b883aeb89916f2e26131b049");
  EXPECT_EQ(PseudoId("a", "s"), PseudoId("a", "s"));
  EXPECT_NE(PseudoId("a", "s"), PseudoId("b", "s"));
  EXPECT_THROW(PseudoId("", "s"), EmptyInput);
  EXPECT_THROW(PseudoId("a", ""), EmptyInput);
}

TEST(PseudoIdTest, NoCollisionsOverTenThousandPairs) {
  std::mt19937_64 rng(77);
  std::set<std::string> ids;
  for (int i = 0; i < 10'000; ++i) {
    const std::string id = PseudoId("study-" + std::to_string(rng() % 50),
                                    "secret-" + std::to_string(i) + "-" + std::to_string(rng()));
    ASSERT_EQ(id.size(), 64u);
    ASSERT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
    ids.insert(id);
  }
  EXPECT_EQ(ids.size(), 10'000u);
}

TEST(SchemaTest, ParseAndRoundTrip) {
  const StudySchema schema = Schema();
  ASSERT_EQ(schema.fields.size(), 3u);
  EXPECT_EQ(schema.Find("topCategory")->valueType, ValueType::kCategory);
  EXPECT_EQ(schema.Find("firstVisitHour")->riskLabel, RiskLabel::kHigh);
  EXPECT_EQ(ParseSchema(SerializeSchema(schema)), schema);
}

TEST(SchemaTest, Rejections) {
  const char* bad[] = {
      R"({"studyId": "s", "fields": [{"name": "a", "valueType": "count"}]})",
      R"({"studyId": "s", "fields": [{"name": "a", "valueType": "count", "riskLabel": "low"},
                                     {"name": "a", "valueType": "count", "riskLabel": "low"}]})",
      R"({"studyId": "s", "fields": [{"name": "a", "valueType": "float", "riskLabel": "low"}]})",
      R"({"studyId": "s", "fields": [{"name": "a", "valueType": "count", "riskLabel": "low", "x": 1}]})",
      R"({"studyId": "../up", "fields": []})",
      R"({"fields": []})",
      "not json",
  };
  for (const char* text : bad)
    EXPECT_THROW(ParseSchema(text), SchemaError) << text;
}

TEST(DigestTest, BuildValidateRoundTrip) {
  const StudySchema schema = Schema();
  const Window window = WindowContaining(1'610'727'691'000);
  const Digest empty = BuildDigest(std::map<std::string, PayloadValue>{}, schema, "pid", window, "k1");
  EXPECT_TRUE(empty.payload.empty());
  EXPECT_TRUE(ValidateDigest(empty, schema).empty());

  const Digest d = BuildDigest(std::map<std::string, PayloadValue>{{"visits.news", std::int64_t{3}},
                                                                    {"topCategory", "news"}},
                               schema, "pid", window, "k1");
  EXPECT_TRUE(ValidateDigest(d, schema).empty());
  EXPECT_EQ(ParseDigest(SerializeDigest(d)), d);

  try {
    BuildDigest(std::map<std::string, std::int64_t>{{"visits.misinfo", 1}}, schema, "pid", window, "k1");
    FAIL();
  } catch (const DigestError& e) {
    EXPECT_EQ(e.kind(), DigestError::Kind::kUndeclaredField);
    EXPECT_NE(std::string(e.what()).find("visits.misinfo"), std::string::npos);
  }
  try {
    BuildDigest(std::map<std::string, std::int64_t>{}, schema, "pid", Window{5, 5}, "k1");
    FAIL();
  } catch (const DigestError& e) {
    EXPECT_EQ(e.kind(), DigestError::Kind::kBadWindow);
  }
  EXPECT_THROW(ParseDigest("[]"), DigestError);
  EXPECT_THROW(ParseDigest(R"({"studyId":"s"})"), DigestError);
}

TEST(DigestTest, GoldenSessionUnderTwoFieldSchema) {
  const Trace trace = testing::LoadFixture("two_tabs.trace");
  DomainLists lists;
  lists.Add(DomainCategory::kNews, "a.com");
  lists.Add(DomainCategory::kMisinfo, "c.com");
  const std::vector<MatchPattern> all = {MatchPattern::AllUrls()};
  const WindowAggregates windows = SessionAggregates(trace, TrackVisits(trace, all), lists);
  ASSERT_EQ(windows.size(), 1u);
  const StudySchema schema = ParseSchema(R"({"studyId": "s1", "fields": [
      {"name": "visits.news", "valueType": "count", "riskLabel": "low"},
      {"name": "visits.untracked", "valueType": "count", "riskLabel": "low"}]})");
  std::map<std::string, PayloadValue> kept;
  for (const auto& [name, value] : windows.begin()->second) {
    if (schema.Find(name))
      kept.emplace(name, value);
  }
  const Digest d = BuildDigest(kept, schema, PseudoId("s1", "golden"),
                               WindowContaining(windows.begin()->first), "k");
  EXPECT_EQ(std::get<std::int64_t>(d.payload.at("visits.news")), 1);
  EXPECT_EQ(std::get<std::int64_t>(d.payload.at("visits.untracked")), 1);
  EXPECT_EQ(ParseDigest(SerializeDigest(d)), d);
  EXPECT_TRUE(ValidateDigest(d, schema).empty());
}

// A second, independently written notion of conformance.
bool Conforms(const Digest& d, const StudySchema& s) {
  if (d.studyId != s.studyId || d.pseudoId.empty() || d.keyId.empty() ||
      !(d.windowStart < d.windowEnd))
    return false;
  for (const auto& [name, value] : d.payload) {
    bool declared = false;
    for (const SchemaField& f : s.fields) {
      if (f.name != name)
        continue;
      declared = true;
      if (f.valueType == ValueType::kCategory) {
        if (value.index() != 1 || std::get<1>(value).empty())
          return false;
      } else if (value.index() != 0 || std::get<0>(value) < 0) {
        return false;
      }
    }
    if (!declared)
      return false;
  }
  return true;
}

TEST(DigestTest, ValidatorAgreesWithSecondChecker) {
  const StudySchema schema = Schema();
  std::mt19937_64 rng(4);
  const std::string names[] = {"visits.news", "topCategory", "firstVisitHour", "bogus"};
  int invalid = 0;
  for (int i = 0; i < 5000; ++i) {
    Digest d;
    d.studyId = rng() % 10 ? "news-2021" : "other";
    d.pseudoId = rng() % 20 ? "pid" : "";
    d.keyId = rng() % 20 ? "k" : "";
    d.windowStart = static_cast<Millis>(rng() % 100);
    d.windowEnd = static_cast<Millis>(rng() % 120);
    const int fields = static_cast<int>(rng() % 4);
    for (int f = 0; f < fields; ++f) {
      const std::string& name = names[rng() % 4];
      switch (rng() % 4) {
        case 0: d.payload[name] = static_cast<std::int64_t>(rng() % 10); break;
        case 1: d.payload[name] = -static_cast<std::int64_t>(1 + rng() % 10); break;
        case 2: d.payload[name] = std::string("news"); break;
        default: d.payload[name] = std::string(); break;
      }
    }
    const auto violations = ValidateDigest(d, schema);
    ASSERT_EQ(violations.empty(), Conforms(d, schema)) << SerializeDigest(d);
    invalid += !violations.empty();
    // Re-serialization never changes the verdict.
    ASSERT_EQ(ValidateDigest(ParseDigest(SerializeDigest(d)), schema), violations);
  }
  EXPECT_GT(invalid, 100);
  EXPECT_LT(invalid, 4900);
}

size_t Occurrences(const fs::path& root, const std::string& needle) {
  size_t hits = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.path().string().find(needle) != std::string::npos)
      ++hits;
    if (entry.is_regular_file()) {
      std::ifstream in(entry.path(), std::ios::binary);
      std::stringstream buffer;
      buffer << in.rdbuf();
      if (buffer.str().find(needle) != std::string::npos)
        ++hits;
    }
  }
  return hits;
}

Digest MakeDigest(const std::string& study, const std::string& pid, Millis start, Millis length) {
  Digest d;
  d.studyId = study;
  d.pseudoId = pid;
  d.windowStart = start;
  d.windowEnd = start + length;
  d.payload["visits.news"] = std::int64_t{1};
  d.keyId = "k";
  return d;
}

TEST(DigestStoreTest, WriteReadDelete) {
  testing::TempDir dir("store");
  const DigestStore store(dir.path());
  const std::string alice = PseudoId("s1", "alice");
  const std::string bob = PseudoId("s1", "bob");
  for (int w = 0; w < 3; ++w) {
    store.Write(MakeDigest("s1", alice, w * kDayMs, kDayMs));
    store.Write(MakeDigest("s1", bob, w * kDayMs, kDayMs));
  }
  store.Write(MakeDigest("s2", PseudoId("s2", "alice"), 0, kDayMs));
  EXPECT_EQ(store.PathFor(MakeDigest("s1", alice, 0, kDayMs)),
            dir.path() / "s1" / alice / "0.json");
  EXPECT_EQ(store.ReadAll().size(), 7u);

  EXPECT_EQ(store.DeleteParticipant("unknown"), 0);
  EXPECT_EQ(store.DeleteParticipant(".."), 0);
  EXPECT_EQ(store.DeleteParticipant(alice), 3);
  EXPECT_EQ(Occurrences(dir.path(), alice), 0u);
  EXPECT_GT(Occurrences(dir.path(), bob), 0u);
  EXPECT_EQ(store.ReadAll().size(), 4u);

  EXPECT_THROW(store.Write(MakeDigest("s1", "../escape", 0, kDayMs)), DigestError);
  EXPECT_THROW(DigestStore(dir.path() / "missing").ReadAll(), StoreUnreadable);
  std::ofstream(dir.path() / "s1" / bob / "9.json") << "garbage";
  EXPECT_THROW(store.ReadAll(), StoreUnreadable);
}

TEST(DigestStoreTest, RetentionSweepMatchesAgeFilter) {
  testing::TempDir dir("sweep");
  const DigestStore store(dir.path());
  const Millis now = 1000 * kDayMs;
  EXPECT_EQ(store.RetentionSweep(now), 0);

  std::mt19937_64 rng(12);
  std::set<std::pair<std::string, Millis>> expected_kept;
  for (int i = 0; i < 200; ++i) {
    const std::string pid = "p" + std::to_string(rng() % 20);
    const Millis start = static_cast<Millis>(rng() % 1000) * kDayMs + static_cast<Millis>(rng() % 1000);
    const Millis length = kDayMs * static_cast<Millis>(1 + rng() % 7);
    store.Write(MakeDigest("s", pid, start, length));
  }
  std::int64_t expected_removed = 0;
  for (const Digest& d : store.ReadAll()) {
    if (now - d.windowEnd > kRawRetentionMs)
      ++expected_removed;
    else
      expected_kept.insert({d.pseudoId, d.windowStart});
  }
  ASSERT_GT(expected_removed, 0);
  ASSERT_FALSE(expected_kept.empty());
  EXPECT_EQ(store.RetentionSweep(now), expected_removed);
  std::set<std::pair<std::string, Millis>> kept;
  for (const Digest& d : store.ReadAll())
    kept.insert({d.pseudoId, d.windowStart});
  EXPECT_EQ(kept, expected_kept);
  EXPECT_EQ(store.RetentionSweep(now), 0);
}

}  // namespace
}  // namespace webmeter
