#ifndef WEBMETER_TRACE_H_
#define WEBMETER_TRACE_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "webmeter/ids.h"

namespace webmeter {

enum class AgeGroup { k19To24, k25To34, k35To44, k45To54, k55To65, k65Plus, kUnknown };

inline constexpr AgeGroup kAllAgeGroups[] = {
    AgeGroup::k19To24, AgeGroup::k25To34, AgeGroup::k35To44,
    AgeGroup::k45To54, AgeGroup::k55To65, AgeGroup::k65Plus};

std::string_view ToString(AgeGroup group);
std::optional<AgeGroup> ParseAgeGroup(std::string_view text);

enum class Disposition { kSameTab, kNewTab, kNewWindow };
enum class SharePlatform { kFacebook, kTwitter, kReddit };
enum class ShareAction { kPost, kReshare, kFavorite, kComment, kVote };
enum class Audience { kPublic, kRestricted, kUnknown };

std::string_view ToString(Disposition value);
std::string_view ToString(SharePlatform value);
std::string_view ToString(ShareAction value);
std::string_view ToString(Audience value);

// Event payloads. Member names double as the field names of the trace file.
struct BrowserStartup {
  Millis systemClockMs = 0;
  bool operator==(const BrowserStartup&) const = default;
};
struct SystemClockChange {
  Millis deltaMs = 0;
  bool operator==(const SystemClockChange&) const = default;
};
struct AddressBarEntry {
  TabId tabId{};
  std::string url;
  bool operator==(const AddressBarEntry&) const = default;
};
struct PageLoad {
  TabId tabId{};
  WindowId windowId{};
  std::string url;
  std::optional<std::string> httpReferrer;
  bool operator==(const PageLoad&) const = default;
};
struct HistoryStateUpdate {
  TabId tabId{};
  std::string newUrl;
  bool operator==(const HistoryStateUpdate&) const = default;
};
struct LinkClick {
  TabId sourceTabId{};
  std::string targetUrl;
  Disposition disposition = Disposition::kSameTab;
  bool operator==(const LinkClick&) const = default;
};
struct TabOpened {
  TabId tabId{};
  WindowId windowId{};
  bool operator==(const TabOpened&) const = default;
};
struct TabActivated {
  WindowId windowId{};
  TabId tabId{};
  bool operator==(const TabActivated&) const = default;
};
struct TabClosed {
  TabId tabId{};
  bool operator==(const TabClosed&) const = default;
};
// An empty windowId means no browser window has focus.
struct WindowFocusChanged {
  std::optional<WindowId> windowId;
  bool operator==(const WindowFocusChanged&) const = default;
};
struct WindowClosed {
  WindowId windowId{};
  bool operator==(const WindowClosed&) const = default;
};
struct InputActivity {
  bool operator==(const InputActivity&) const = default;
};
struct ScrollPosition {
  TabId tabId{};
  int depthPercent = 0;
  bool operator==(const ScrollPosition&) const = default;
};
struct LinkVisible {
  TabId tabId{};
  std::string url;
  std::int64_t areaPx = 0;
  bool operator==(const LinkVisible&) const = default;
};
struct LinkHidden {
  TabId tabId{};
  std::string url;
  bool operator==(const LinkHidden&) const = default;
};
struct SocialShare {
  SharePlatform platform = SharePlatform::kFacebook;
  ShareAction action = ShareAction::kPost;
  std::optional<std::string> url;
  Audience audience = Audience::kUnknown;
  bool reshare = false;
  bool operator==(const SocialShare&) const = default;
};
struct BrowserShutdown {
  bool operator==(const BrowserShutdown&) const = default;
};

using EventKind =
    std::variant<BrowserStartup, SystemClockChange, AddressBarEntry, PageLoad,
                 HistoryStateUpdate, LinkClick, TabOpened, TabActivated,
                 TabClosed, WindowFocusChanged, WindowClosed, InputActivity,
                 ScrollPosition, LinkVisible, LinkHidden, SocialShare,
                 BrowserShutdown>;

std::string_view KindName(const EventKind& kind);

struct TraceEvent {
  Millis t = 0;
  EventKind kind;
  bool operator==(const TraceEvent&) const = default;
};

// One participant session. Optional |generator| records the pseudo-random
// algorithm and seed of synthesized traces.
struct Trace {
  std::string participantId;
  AgeGroup ageGroup = AgeGroup::kUnknown;
  std::optional<std::string> generator;
  std::vector<TraceEvent> events;
  bool operator==(const Trace&) const = default;

  Millis EndTime() const { return events.empty() ? 0 : events.back().t; }
};

inline constexpr int kTraceFormatVersion = 1;

class TraceParseError : public std::runtime_error {
 public:
  enum class Kind { kMalformedRecord, kOutOfOrderTimestamp, kDanglingReference };

  TraceParseError(Kind kind, int line, std::string detail,
                  std::optional<std::int64_t> id = std::nullopt);

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  std::optional<std::int64_t> id() const { return id_; }

 private:
  Kind kind_;
  int line_;
  std::optional<std::int64_t> id_;
};

enum class ViolationRule {
  kMissingStartup,
  kDuplicateStartup,
  kNegativeTimestamp,
  kOutOfOrderTimestamp,
  kDanglingReference,
  kDuplicateId,
  kTabWindowMismatch,
  kDepthOutOfRange,
  kNegativeArea,
  kInvalidUrl,
  kEventAfterShutdown,
  kUnterminatedSession,
};

std::string_view ToString(ViolationRule rule);

struct Violation {
  size_t eventIndex = 0;
  ViolationRule rule = ViolationRule::kMissingStartup;
  std::string detail;
  std::optional<std::int64_t> id;
  bool operator==(const Violation&) const = default;
};

// Checks every event invariant. Empty result means every measurement in this
// library accepts the trace.
std::vector<Violation> ValidateTrace(const Trace& trace);

// Syntax-level decode of the line format: records are checked for shape and
// types but not for cross-event invariants. Throws kMalformedRecord.
Trace DecodeTrace(std::string_view bytes);

// DecodeTrace followed by ValidateTrace; the first violation is thrown.
Trace ParseTrace(std::string_view bytes);

std::string SerializeTrace(const Trace& trace);

}  // namespace webmeter

#endif  // WEBMETER_TRACE_H_
