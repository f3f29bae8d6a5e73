#ifndef WEBMETER_NAVIGATION_H_
#define WEBMETER_NAVIGATION_H_

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "webmeter/ids.h"
#include "webmeter/match_pattern.h"
#include "webmeter/trace.h"

namespace webmeter {

enum class TransitionType { kTyped, kLinkClick, kHistoryState, kReload, kUnknown };

std::string_view ToString(TransitionType type);

struct PageVisit {
  PageId pageId{};
  TabId tabId{};
  WindowId windowId{};
  std::string url;  // normalized
  std::optional<std::string> httpReferrer;
  std::optional<PageId> priorPageId;
  TransitionType transitionType = TransitionType::kUnknown;
  std::optional<std::string> transitionQualifier;
  Millis startTime = 0;
  Millis stopTime = 0;
  int maxScrollDepth = 0;
  std::optional<Millis> attentionDurationMs;

  // Index of the PageLoad / HistoryStateUpdate that started the visit.
  size_t eventIndex = 0;

  bool operator==(const PageVisit&) const = default;
};

struct TrackOptions {
  // A load is attributed to a click or typed entry at most this long before.
  Millis correlationWindowMs = 5000;
};

// Reconstructs page visits, including History-API navigations, for URLs in
// |scope|. Out-of-scope loads still end the previous visit in their tab.
// Page ids are assigned 1, 2, ... in start order.
std::vector<PageVisit> TrackVisits(const Trace& trace,
                                   std::span<const MatchPattern> scope,
                                   const TrackOptions& options = {});

class GraphError : public std::runtime_error {
 public:
  enum class Kind { kCycleDetected, kUnknownPriorPage, kDuplicatePageId };
  GraphError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Logical-referrer DAG: an edge prior -> page for every visit naming a prior.
class VisitGraph {
 public:
  const std::vector<PageVisit>& nodes() const { return nodes_; }
  const std::vector<PageId>& Children(PageId page) const;
  std::vector<std::pair<PageId, PageId>> Edges() const;
  size_t edge_count() const;

  // Kahn's order; parents precede children.
  const std::vector<PageId>& TopologicalOrder() const { return order_; }

 private:
  friend VisitGraph BuildDag(std::vector<PageVisit> visits);

  std::vector<PageVisit> nodes_;
  std::map<PageId, std::vector<PageId>> children_;
  std::vector<PageId> order_;
};

VisitGraph BuildDag(std::vector<PageVisit> visits);

enum class ReferrerMethod { kLoadOrder, kHttpReferrer, kHistory };

inline constexpr ReferrerMethod kAllReferrerMethods[] = {
    ReferrerMethod::kLoadOrder, ReferrerMethod::kHttpReferrer,
    ReferrerMethod::kHistory};

std::string_view ToString(ReferrerMethod method);

inline constexpr Millis kReferrerCapMs = 30 * 60 * 1000;

// Conventional logical-referrer estimates. Values are normalized URLs.
std::map<PageId, std::optional<std::string>> ReferrerBaseline(
    ReferrerMethod method, std::span<const PageVisit> visits,
    Millis capMs = kReferrerCapMs);

// WebScience logical referrer: the URL of the prior visit.
std::map<PageId, std::optional<std::string>> WebScienceReferrers(
    std::span<const PageVisit> visits);

struct ComparisonCounts {
  std::int64_t neither = 0;
  std::int64_t onlyOther = 0;
  std::int64_t onlyWebScience = 0;
  std::int64_t fullMatch = 0;
  std::int64_t partialOrNoMatch = 0;
  // Breakdown of partialOrNoMatch: same registrable domain, or not.
  std::int64_t partial = 0;
  std::int64_t noMatch = 0;

  std::int64_t Total() const {
    return neither + onlyOther + onlyWebScience + fullMatch + partialOrNoMatch;
  }
  ComparisonCounts& operator+=(const ComparisonCounts& other);
  bool operator==(const ComparisonCounts&) const = default;
};

ComparisonCounts CompareReferrers(std::span<const PageVisit> visits,
                                  ReferrerMethod method,
                                  Millis capMs = kReferrerCapMs);

}  // namespace webmeter

#endif  // WEBMETER_NAVIGATION_H_
