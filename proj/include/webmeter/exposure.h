#ifndef WEBMETER_EXPOSURE_H_
#define WEBMETER_EXPOSURE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webmeter/ids.h"
#include "webmeter/navigation.h"
#include "webmeter/trace.h"

namespace webmeter {

enum class DomainCategory {
  kNews, kHealth, kMisinfo, kAggregator, kFactcheck, kPortal, kSearch, kSocial, kWebmail
};

inline constexpr DomainCategory kAllCategories[] = {
    DomainCategory::kNews,      DomainCategory::kHealth, DomainCategory::kMisinfo,
    DomainCategory::kAggregator, DomainCategory::kFactcheck, DomainCategory::kPortal,
    DomainCategory::kSearch,    DomainCategory::kSocial, DomainCategory::kWebmail};

inline constexpr std::string_view kUntrackedLabel = "untracked";

std::string_view ToString(DomainCategory category);
std::optional<DomainCategory> ParseCategory(std::string_view text);

// Label for a classification result; "untracked" for nullopt.
std::string CategoryLabel(std::optional<DomainCategory> category);

// Category labels in report order, "untracked" last.
std::vector<std::string> CategoryLabels();

class DomainListError : public std::runtime_error {
 public:
  enum class Kind { kOverlappingLists, kBadCategory, kMalformedLine };
  DomainListError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Study domain lists: category -> registrable domains. Hosts classify by the
// longest listed domain they fall under.
class DomainLists {
 public:
  struct Match {
    DomainCategory category;
    std::string domain;  // the list entry, never the raw host
  };

  void Add(DomainCategory category, std::string_view domain);

  // Throws kOverlappingLists when a domain sits in two categories.
  void Validate() const;

  std::optional<Match> ClassifyHost(std::string_view host) const;
  // Returns nullopt for unparseable URLs as well as unlisted ones.
  std::optional<Match> ClassifyUrl(std::string_view url) const;

  std::set<std::string> AllDomains() const;
  const std::map<DomainCategory, std::set<std::string>>& categories() const {
    return categories_;
  }

 private:
  std::map<DomainCategory, std::set<std::string>> categories_;
};

// CSV rows "category,domain"; an optional "category,domain" header line and
// "#" comments are skipped.
DomainLists ParseDomainLists(std::string_view csv);
DomainLists LoadDomainLists(const std::filesystem::path& path);
std::string SerializeDomainLists(const DomainLists& lists);

class LinkResolutionError : public std::runtime_error {
 public:
  enum class Kind { kRedirectCycle, kDepthExceeded };
  LinkResolutionError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Shortener / redirect table keyed by normalized URL.
class RedirectMap {
 public:
  void Add(std::string_view from, std::string_view to);
  const std::string* Find(const std::string& normalized) const;
  bool empty() const { return map_.empty(); }

 private:
  std::map<std::string, std::string> map_;
};

// Follows redirects until a URL with no entry; returns it normalized.
std::string ResolveLink(std::string_view url, const RedirectMap& redirects,
                        int maxDepth = 10);

struct ExposureOptions {
  std::int64_t minAreaPx = 2500;
  Millis minVisibleMs = 1000;
  const RedirectMap* redirects = nullptr;
};

struct ExposureRecord {
  Millis t = 0;
  std::optional<std::string> sourceDomain;
  std::optional<std::string> exposedDomain;
  std::string sourceCategory;
  std::string exposedCategory;
  bool operator==(const ExposureRecord&) const = default;
};

struct ExposureResult {
  std::string participantId;
  std::vector<ExposureRecord> records;
  std::int64_t untrackedCount = 0;
  // Untracked exposures tallied by the category of the page they were on.
  std::map<std::string, std::int64_t> untrackedBySource;
};

// A LinkVisible..LinkHidden span yields an exposure when the link is at least
// minAreaPx and is on screen (tab selected, window focused) for at least
// minVisibleMs. Spans also end when their tab navigates or closes.
ExposureResult DetectExposures(const Trace& trace, const DomainLists& lists,
                               const ExposureOptions& options = {});

struct ShareRecord {
  Millis t = 0;
  SharePlatform platform = SharePlatform::kFacebook;
  ShareAction action = ShareAction::kPost;
  Audience audience = Audience::kUnknown;
  bool reshare = false;
  std::string sharedCategory;
  std::string sharedDomain;
  bool visitedBefore = false;
  bool operator==(const ShareRecord&) const = default;
};

struct ShareResult {
  std::string participantId;
  std::vector<ShareRecord> records;
  std::int64_t untrackedShareCount = 0;
};

ShareResult TrackShares(const Trace& trace, const DomainLists& lists,
                        const RedirectMap* redirects = nullptr);

// Row label -> column label -> value, over CategoryLabels() on both axes.
using CategoryMatrix = std::map<std::string, std::map<std::string, double>>;

struct StudySummary {
  // Distinct participants with at least one exposure in the cell.
  CategoryMatrix usersExposed;
  // Per source row, percent of that row's exposures; rows with no exposures
  // are all zero, every other row sums to 100.
  CategoryMatrix exposureShare;
  std::map<std::string, std::int64_t> visitsByCategory;
  std::map<std::string, std::int64_t> sharesByCategory;
};

StudySummary SummarizeStudy(std::span<const ExposureResult> exposures,
                            std::span<const ShareResult> shares,
                            std::span<const PageVisit> visits,
                            const DomainLists& lists);

}  // namespace webmeter

#endif  // WEBMETER_EXPOSURE_H_
