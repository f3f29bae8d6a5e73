#include "webmeter/trace.h"

#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "webmeter/url.h"

namespace webmeter {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

template <typename Enum, size_t N>
std::optional<Enum> LookupName(const std::string_view (&names)[N],
                               std::string_view text) {
  for (size_t i = 0; i < N; ++i) {
    if (names[i] == text)
      return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::string_view kAgeGroupNames[] = {"19-24", "25-34", "35-44", "45-54",
                                               "55-65", "65+",   "unknown"};
constexpr std::string_view kDispositionNames[] = {"same-tab", "new-tab",
                                                  "new-window"};
constexpr std::string_view kPlatformNames[] = {"facebook", "twitter", "reddit"};
constexpr std::string_view kActionNames[] = {"post", "reshare", "favorite",
                                             "comment", "vote"};
constexpr std::string_view kAudienceNames[] = {"public", "restricted", "unknown"};
constexpr std::string_view kKindNames[] = {
    "BrowserStartup",  "SystemClockChange", "AddressBarEntry",
    "PageLoad",        "HistoryStateUpdate", "LinkClick",
    "TabOpened",       "TabActivated",      "TabClosed",
    "WindowFocusChanged", "WindowClosed",   "InputActivity",
    "ScrollPosition",  "LinkVisible",       "LinkHidden",
    "SocialShare",     "BrowserShutdown"};
static_assert(std::size(kKindNames) == std::variant_size_v<EventKind>);

constexpr std::string_view kRuleNames[] = {
    "MissingStartup",   "DuplicateStartup",  "NegativeTimestamp",
    "OutOfOrderTimestamp", "DanglingReference", "DuplicateId",
    "TabWindowMismatch", "DepthOutOfRange",   "NegativeArea",
    "InvalidUrl",       "EventAfterShutdown", "UnterminatedSession"};

struct FieldError {
  std::string message;
};

// Reads typed fields from one record and remembers which keys were consumed
// so unknown fields can be rejected.
class RecordReader {
 public:
  explicit RecordReader(const Json& object) : object_(object) {}

  std::int64_t Int(const char* key) {
    const Json& v = Required(key);
    if (!v.is_number_integer())
      throw FieldError{std::string(key) + " must be an integer"};
    return v.get<std::int64_t>();
  }

  std::string Str(const char* key) {
    const Json& v = Required(key);
    if (!v.is_string())
      throw FieldError{std::string(key) + " must be a string"};
    return v.get<std::string>();
  }

  bool Bool(const char* key) {
    const Json& v = Required(key);
    if (!v.is_boolean())
      throw FieldError{std::string(key) + " must be a boolean"};
    return v.get<bool>();
  }

  std::optional<std::string> OptStr(const char* key) {
    seen_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end() || it->is_null())
      return std::nullopt;
    if (!it->is_string())
      throw FieldError{std::string(key) + " must be a string or null"};
    return it->get<std::string>();
  }

  // Present but possibly null.
  std::optional<std::int64_t> NullableInt(const char* key) {
    const Json& v = Required(key);
    if (v.is_null())
      return std::nullopt;
    if (!v.is_number_integer())
      throw FieldError{std::string(key) + " must be an integer or null"};
    return v.get<std::int64_t>();
  }

  template <typename Enum, size_t N>
  Enum Named(const char* key, const std::string_view (&names)[N]) {
    const std::string text = Str(key);
    auto value = LookupName<Enum>(names, text);
    if (!value)
      throw FieldError{std::string(key) + " has unknown value '" + text + "'"};
    return *value;
  }

  void Finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw FieldError{"unknown field '" + it.key() + "'"};
    }
  }

 private:
  const Json& Required(const char* key) {
    seen_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end())
      throw FieldError{std::string("missing field ") + key};
    return *it;
  }

  const Json& object_;
  std::set<std::string> seen_;
};

EventKind ReadKind(std::string_view name, RecordReader& r) {
  auto index = LookupName<size_t>(kKindNames, name);
  if (!index)
    throw FieldError{"unknown kind '" + std::string(name) + "'"};
  auto tab = [&](const char* key) { return TabId{r.Int(key)}; };
  auto window = [&](const char* key) { return WindowId{r.Int(key)}; };
  switch (*index) {
    case 0:
      return BrowserStartup{r.Int("systemClockMs")};
    case 1:
      return SystemClockChange{r.Int("deltaMs")};
    case 2:
      return AddressBarEntry{tab("tabId"), r.Str("url")};
    case 3: {
      PageLoad e{tab("tabId"), window("windowId"), r.Str("url"), std::nullopt};
      e.httpReferrer = r.OptStr("httpReferrer");
      return e;
    }
    case 4:
      return HistoryStateUpdate{tab("tabId"), r.Str("newUrl")};
    case 5: {
      LinkClick e{tab("sourceTabId"), r.Str("targetUrl"), Disposition::kSameTab};
      e.disposition = r.Named<Disposition>("disposition", kDispositionNames);
      return e;
    }
    case 6:
      return TabOpened{tab("tabId"), window("windowId")};
    case 7:
      return TabActivated{window("windowId"), tab("tabId")};
    case 8:
      return TabClosed{tab("tabId")};
    case 9: {
      WindowFocusChanged e;
      if (auto id = r.NullableInt("windowId"))
        e.windowId = WindowId{*id};
      return e;
    }
    case 10:
      return WindowClosed{window("windowId")};
    case 11:
      return InputActivity{};
    case 12:
      return ScrollPosition{tab("tabId"), static_cast<int>(r.Int("depthPercent"))};
    case 13:
      return LinkVisible{tab("tabId"), r.Str("url"), r.Int("areaPx")};
    case 14:
      return LinkHidden{tab("tabId"), r.Str("url")};
    case 15: {
      SocialShare e;
      e.platform = r.Named<SharePlatform>("platform", kPlatformNames);
      e.action = r.Named<ShareAction>("action", kActionNames);
      e.url = r.OptStr("url");
      e.audience = r.Named<Audience>("audience", kAudienceNames);
      e.reshare = r.Bool("reshare");
      return e;
    }
    case 16:
      return BrowserShutdown{};
  }
  throw FieldError{"unreachable kind"};
}

struct KindWriter {
  OrderedJson& out;

  void operator()(const BrowserStartup& e) { out["systemClockMs"] = e.systemClockMs; }
  void operator()(const SystemClockChange& e) { out["deltaMs"] = e.deltaMs; }
  void operator()(const AddressBarEntry& e) {
    out["tabId"] = ToInt(e.tabId);
    out["url"] = e.url;
  }
  void operator()(const PageLoad& e) {
    out["tabId"] = ToInt(e.tabId);
    out["windowId"] = ToInt(e.windowId);
    out["url"] = e.url;
    if (e.httpReferrer)
      out["httpReferrer"] = *e.httpReferrer;
  }
  void operator()(const HistoryStateUpdate& e) {
    out["tabId"] = ToInt(e.tabId);
    out["newUrl"] = e.newUrl;
  }
  void operator()(const LinkClick& e) {
    out["sourceTabId"] = ToInt(e.sourceTabId);
    out["targetUrl"] = e.targetUrl;
    out["disposition"] = ToString(e.disposition);
  }
  void operator()(const TabOpened& e) {
    out["tabId"] = ToInt(e.tabId);
    out["windowId"] = ToInt(e.windowId);
  }
  void operator()(const TabActivated& e) {
    out["windowId"] = ToInt(e.windowId);
    out["tabId"] = ToInt(e.tabId);
  }
  void operator()(const TabClosed& e) { out["tabId"] = ToInt(e.tabId); }
  void operator()(const WindowFocusChanged& e) {
    out["windowId"] = e.windowId ? OrderedJson(ToInt(*e.windowId)) : OrderedJson();
  }
  void operator()(const WindowClosed& e) { out["windowId"] = ToInt(e.windowId); }
  void operator()(const InputActivity&) {}
  void operator()(const ScrollPosition& e) {
    out["tabId"] = ToInt(e.tabId);
    out["depthPercent"] = e.depthPercent;
  }
  void operator()(const LinkVisible& e) {
    out["tabId"] = ToInt(e.tabId);
    out["url"] = e.url;
    out["areaPx"] = e.areaPx;
  }
  void operator()(const LinkHidden& e) {
    out["tabId"] = ToInt(e.tabId);
    out["url"] = e.url;
  }
  void operator()(const SocialShare& e) {
    out["platform"] = ToString(e.platform);
    out["action"] = ToString(e.action);
    if (e.url)
      out["url"] = *e.url;
    out["audience"] = ToString(e.audience);
    out["reshare"] = e.reshare;
  }
  void operator()(const BrowserShutdown&) {}
};

bool ValidUrl(std::string_view url) {
  try {
    ParseUrl(url);
    return true;
  } catch (const InvalidUrl&) {
    return false;
  }
}

// Replays tab/window lifetimes and reports every broken invariant.
class TraceChecker {
 public:
  explicit TraceChecker(std::vector<Violation>& out) : out_(out) {}

  void Check(size_t index, const TraceEvent& event) {
    index_ = index;
    std::visit(*this, event.kind);
  }

  void operator()(const BrowserStartup&) {}
  void operator()(const SystemClockChange&) {}
  void operator()(const AddressBarEntry& e) {
    RequireTab(e.tabId);
    RequireUrl(e.url);
  }
  void operator()(const PageLoad& e) {
    RequireTab(e.tabId);
    RequireWindow(e.windowId);
    RequireTabInWindow(e.tabId, e.windowId);
    RequireUrl(e.url);
    if (e.httpReferrer)
      RequireUrl(*e.httpReferrer);
  }
  void operator()(const HistoryStateUpdate& e) {
    RequireTab(e.tabId);
    RequireUrl(e.newUrl);
  }
  void operator()(const LinkClick& e) {
    RequireTab(e.sourceTabId);
    RequireUrl(e.targetUrl);
  }
  void operator()(const TabOpened& e) {
    if (tabs_.count(e.tabId)) {
      Add(ViolationRule::kDuplicateId, "tab already open", ToInt(e.tabId));
      return;
    }
    tabs_[e.tabId] = e.windowId;
    windows_.insert(e.windowId);
  }
  void operator()(const TabActivated& e) {
    RequireWindow(e.windowId);
    RequireTab(e.tabId);
    RequireTabInWindow(e.tabId, e.windowId);
  }
  void operator()(const TabClosed& e) {
    if (RequireTab(e.tabId))
      tabs_.erase(e.tabId);
  }
  void operator()(const WindowFocusChanged& e) {
    if (e.windowId)
      RequireWindow(*e.windowId);
  }
  void operator()(const WindowClosed& e) {
    if (!RequireWindow(e.windowId))
      return;
    windows_.erase(e.windowId);
    std::erase_if(tabs_, [&](const auto& kv) { return kv.second == e.windowId; });
  }
  void operator()(const InputActivity&) {}
  void operator()(const ScrollPosition& e) {
    RequireTab(e.tabId);
    if (e.depthPercent < 0 || e.depthPercent > 100)
      Add(ViolationRule::kDepthOutOfRange, std::to_string(e.depthPercent));
  }
  void operator()(const LinkVisible& e) {
    RequireTab(e.tabId);
    RequireUrl(e.url);
    if (e.areaPx < 0)
      Add(ViolationRule::kNegativeArea, std::to_string(e.areaPx));
  }
  void operator()(const LinkHidden& e) {
    RequireTab(e.tabId);
    RequireUrl(e.url);
  }
  void operator()(const SocialShare& e) {
    if (e.url)
      RequireUrl(*e.url);
  }
  void operator()(const BrowserShutdown&) {}

 private:
  void Add(ViolationRule rule, std::string detail,
           std::optional<std::int64_t> id = std::nullopt) {
    out_.push_back(Violation{index_, rule, std::move(detail), id});
  }

  bool RequireTab(TabId tab) {
    if (tabs_.count(tab))
      return true;
    Add(ViolationRule::kDanglingReference, "tab " + std::to_string(ToInt(tab)),
        ToInt(tab));
    return false;
  }

  bool RequireWindow(WindowId window) {
    if (windows_.count(window))
      return true;
    Add(ViolationRule::kDanglingReference,
        "window " + std::to_string(ToInt(window)), ToInt(window));
    return false;
  }

  void RequireTabInWindow(TabId tab, WindowId window) {
    auto it = tabs_.find(tab);
    if (it != tabs_.end() && windows_.count(window) && it->second != window) {
      Add(ViolationRule::kTabWindowMismatch,
          "tab " + std::to_string(ToInt(tab)) + " is not in window " +
              std::to_string(ToInt(window)),
          ToInt(tab));
    }
  }

  void RequireUrl(const std::string& url) {
    if (!ValidUrl(url))
      Add(ViolationRule::kInvalidUrl, url);
  }

  std::vector<Violation>& out_;
  size_t index_ = 0;
  std::map<TabId, WindowId> tabs_;
  std::set<WindowId> windows_;
};

}  // namespace

std::string_view ToString(AgeGroup group) {
  return kAgeGroupNames[static_cast<size_t>(group)];
}
std::optional<AgeGroup> ParseAgeGroup(std::string_view text) {
  return LookupName<AgeGroup>(kAgeGroupNames, text);
}
std::string_view ToString(Disposition value) {
  return kDispositionNames[static_cast<size_t>(value)];
}
std::string_view ToString(SharePlatform value) {
  return kPlatformNames[static_cast<size_t>(value)];
}
std::string_view ToString(ShareAction value) {
  return kActionNames[static_cast<size_t>(value)];
}
std::string_view ToString(Audience value) {
  return kAudienceNames[static_cast<size_t>(value)];
}
std::string_view ToString(ViolationRule rule) {
  return kRuleNames[static_cast<size_t>(rule)];
}
std::string_view KindName(const EventKind& kind) {
  return kKindNames[kind.index()];
}

TraceParseError::TraceParseError(Kind kind, int line, std::string detail,
                                 std::optional<std::int64_t> id)
    : std::runtime_error("line " + std::to_string(line) + ": " + detail),
      kind_(kind),
      line_(line),
      id_(id) {}

std::vector<Violation> ValidateTrace(const Trace& trace) {
  std::vector<Violation> violations;
  const auto& events = trace.events;
  if (events.empty()) {
    violations.push_back({0, ViolationRule::kMissingStartup, "empty trace", {}});
    violations.push_back({0, ViolationRule::kUnterminatedSession, "empty trace", {}});
    return violations;
  }
  if (!std::holds_alternative<BrowserStartup>(events.front().kind)) {
    violations.push_back({0, ViolationRule::kMissingStartup,
                          std::string(KindName(events.front().kind)), {}});
  }

  TraceChecker checker(violations);
  std::optional<size_t> shutdown_index;
  for (size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& e = events[i];
    if (e.t < 0)
      violations.push_back({i, ViolationRule::kNegativeTimestamp, std::to_string(e.t), {}});
    if (i > 0 && e.t < events[i - 1].t) {
      violations.push_back({i, ViolationRule::kOutOfOrderTimestamp,
                            std::to_string(e.t) + " < " + std::to_string(events[i - 1].t),
                            {}});
    }
    if (i > 0 && std::holds_alternative<BrowserStartup>(e.kind))
      violations.push_back({i, ViolationRule::kDuplicateStartup, "", {}});
    if (shutdown_index) {
      violations.push_back({i, ViolationRule::kEventAfterShutdown,
                            std::string(KindName(e.kind)), {}});
    }
    checker.Check(i, e);
    if (std::holds_alternative<BrowserShutdown>(e.kind) && !shutdown_index)
      shutdown_index = i;
  }
  if (!shutdown_index) {
    violations.push_back({events.size() - 1, ViolationRule::kUnterminatedSession,
                          "no BrowserShutdown", {}});
  }
  return violations;
}

Trace DecodeTrace(std::string_view bytes) {
  using Kind = TraceParseError::Kind;
  Trace trace;
  std::istringstream in{std::string(bytes)};
  std::string line;
  int line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty())
      throw TraceParseError(Kind::kMalformedRecord, line_number, "empty line");
    Json record = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!record.is_object())
      throw TraceParseError(Kind::kMalformedRecord, line_number, "not a JSON object");
    try {
      RecordReader reader(record);
      if (!have_header) {
        if (reader.Int("formatVersion") != kTraceFormatVersion)
          throw FieldError{"unsupported formatVersion"};
        trace.participantId = reader.Str("participantId");
        auto group = reader.Named<AgeGroup>("ageGroup", kAgeGroupNames);
        trace.ageGroup = group;
        trace.generator = reader.OptStr("generator");
        reader.Finish();
        have_header = true;
        continue;
      }
      TraceEvent event;
      event.t = reader.Int("t");
      event.kind = ReadKind(reader.Str("kind"), reader);
      reader.Finish();
      trace.events.push_back(std::move(event));
    } catch (const FieldError& error) {
      throw TraceParseError(Kind::kMalformedRecord, line_number, error.message);
    }
  }
  if (!have_header)
    throw TraceParseError(Kind::kMalformedRecord, 1, "missing header");
  return trace;
}

Trace ParseTrace(std::string_view bytes) {
  using Kind = TraceParseError::Kind;
  Trace trace = DecodeTrace(bytes);
  std::vector<Violation> violations = ValidateTrace(trace);
  if (violations.empty())
    return trace;
  const Violation& first = violations.front();
  // Header occupies line 1.
  const int line = static_cast<int>(first.eventIndex) + 2;
  std::string detail = std::string(ToString(first.rule)) +
                       (first.detail.empty() ? "" : ": " + first.detail);
  switch (first.rule) {
    case ViolationRule::kOutOfOrderTimestamp:
      throw TraceParseError(Kind::kOutOfOrderTimestamp, line, detail);
    case ViolationRule::kDanglingReference:
      throw TraceParseError(Kind::kDanglingReference, line, detail, first.id);
    default:
      throw TraceParseError(Kind::kMalformedRecord, line, detail);
  }
}

std::string SerializeTrace(const Trace& trace) {
  std::string out;
  OrderedJson header;
  header["formatVersion"] = kTraceFormatVersion;
  header["participantId"] = trace.participantId;
  header["ageGroup"] = ToString(trace.ageGroup);
  if (trace.generator)
    header["generator"] = *trace.generator;
  out += header.dump();
  out += '\n';
  for (const TraceEvent& event : trace.events) {
    OrderedJson record;
    record["t"] = event.t;
    record["kind"] = KindName(event.kind);
    std::visit(KindWriter{record}, event.kind);
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace webmeter
