#include "webmeter/navigation.h"

#include <algorithm>
#include <deque>
#include <numeric>

#include "webmeter/url.h"

namespace webmeter {

namespace {

constexpr std::string_view kTransitionNames[] = {"typed", "link_click",
                                                 "history_state", "reload",
                                                 "unknown"};
constexpr std::string_view kReferrerMethodNames[] = {"load_order",
                                                     "http_referrer", "history"};
constexpr std::string_view kFromAddressBar = "from_address_bar";

struct TabState {
  WindowId window{};
  std::optional<size_t> visit;
  std::string url;
  std::optional<std::pair<Millis, std::string>> typed;
};

struct PendingClick {
  Millis t = 0;
  TabId source{};
  WindowId sourceWindow{};
  std::string target;
  Disposition disposition = Disposition::kSameTab;
  std::optional<PageId> sourcePage;
  bool used = false;
};

class VisitTracker {
 public:
  VisitTracker(std::span<const MatchPattern> scope, const TrackOptions& options)
      : scope_(scope), options_(options) {}

  std::vector<PageVisit> Run(const Trace& trace) {
    for (size_t i = 0; i < trace.events.size(); ++i) {
      index_ = i;
      now_ = trace.events[i].t;
      std::visit([this](const auto& e) { On(e); }, trace.events[i].kind);
    }
    // Validation guarantees a shutdown; this covers callers that skip it.
    for (auto& [tab, state] : tabs_)
      Close(state);
    return std::move(visits_);
  }

 private:
  void On(const TabOpened& e) { tabs_[e.tabId] = TabState{e.windowId, {}, {}, {}}; }

  void On(const AddressBarEntry& e) {
    tabs_[e.tabId].typed = std::make_pair(now_, NormalizeUrl(e.url));
  }

  void On(const LinkClick& e) {
    TabState& source = tabs_[e.sourceTabId];
    std::optional<PageId> page;
    if (source.visit)
      page = visits_[*source.visit].pageId;
    clicks_.push_back({now_, e.sourceTabId, source.window, NormalizeUrl(e.targetUrl),
                       e.disposition, page, false});
  }

  void On(const PageLoad& e) {
    TabState& tab = tabs_[e.tabId];
    Close(tab);
    const std::string url = NormalizeUrl(e.url);

    PendingClick* click = FindClick(e.tabId, e.windowId, url);
    const bool typed = tab.typed && tab.typed->second == url &&
                       now_ - tab.typed->first <= options_.correlationWindowMs;

    PageVisit visit = NewVisit(e.tabId, tab.window, url);
    if (e.httpReferrer)
      visit.httpReferrer = NormalizeUrl(*e.httpReferrer);
    if (click && (!typed || click->t >= tab.typed->first)) {
      click->used = true;
      visit.transitionType = TransitionType::kLinkClick;
      visit.priorPageId = click->sourcePage;
    } else if (typed) {
      visit.transitionType = TransitionType::kTyped;
      visit.transitionQualifier = std::string(kFromAddressBar);
    } else if (url == tab.url) {
      visit.transitionType = TransitionType::kReload;
    }
    tab.typed.reset();
    Open(tab, std::move(visit));
  }

  void On(const HistoryStateUpdate& e) {
    TabState& tab = tabs_[e.tabId];
    std::optional<PageId> previous;
    if (tab.visit)
      previous = visits_[*tab.visit].pageId;
    Close(tab);
    PageVisit visit = NewVisit(e.tabId, tab.window, NormalizeUrl(e.newUrl));
    visit.transitionType = TransitionType::kHistoryState;
    visit.priorPageId = previous;
    Open(tab, std::move(visit));
  }

  void On(const ScrollPosition& e) {
    TabState& tab = tabs_[e.tabId];
    if (tab.visit) {
      int& depth = visits_[*tab.visit].maxScrollDepth;
      depth = std::max(depth, e.depthPercent);
    }
  }

  void On(const TabClosed& e) {
    auto it = tabs_.find(e.tabId);
    if (it == tabs_.end())
      return;
    Close(it->second);
    tabs_.erase(it);
  }

  void On(const WindowClosed& e) {
    for (auto it = tabs_.begin(); it != tabs_.end();) {
      if (it->second.window == e.windowId) {
        Close(it->second);
        it = tabs_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void On(const BrowserShutdown&) {
    for (auto& [tab, state] : tabs_)
      Close(state);
  }

  template <typename Other>
  void On(const Other&) {}

  PendingClick* FindClick(TabId tab, WindowId window, const std::string& url) {
    while (!clicks_.empty() &&
           now_ - clicks_.front().t > options_.correlationWindowMs) {
      clicks_.pop_front();
    }
    for (auto it = clicks_.rbegin(); it != clicks_.rend(); ++it) {
      if (it->used || it->target != url)
        continue;
      bool consistent = false;
      switch (it->disposition) {
        case Disposition::kSameTab:
          consistent = it->source == tab;
          break;
        case Disposition::kNewTab:
          consistent = it->source != tab && it->sourceWindow == window;
          break;
        case Disposition::kNewWindow:
          consistent = it->sourceWindow != window;
          break;
      }
      if (consistent)
        return &*it;
    }
    return nullptr;
  }

  PageVisit NewVisit(TabId tab, WindowId window, std::string url) {
    PageVisit visit;
    visit.tabId = tab;
    visit.windowId = window;
    visit.url = std::move(url);
    visit.startTime = now_;
    visit.stopTime = now_;
    visit.eventIndex = index_;
    return visit;
  }

  void Open(TabState& tab, PageVisit visit) {
    tab.url = visit.url;
    if (!MatchesAny(scope_, visit.url)) {
      tab.visit.reset();
      return;
    }
    visit.pageId = PageId{static_cast<std::int64_t>(visits_.size()) + 1};
    visits_.push_back(std::move(visit));
    tab.visit = visits_.size() - 1;
  }

  void Close(TabState& tab) {
    if (tab.visit)
      visits_[*tab.visit].stopTime = now_;
    tab.visit.reset();
  }

  std::span<const MatchPattern> scope_;
  TrackOptions options_;
  size_t index_ = 0;
  Millis now_ = 0;
  std::map<TabId, TabState> tabs_;
  std::deque<PendingClick> clicks_;
  std::vector<PageVisit> visits_;
};

std::vector<size_t> StartOrder(std::span<const PageVisit> visits) {
  std::vector<size_t> order(visits.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (visits[a].startTime != visits[b].startTime)
      return visits[a].startTime < visits[b].startTime;
    return visits[a].pageId < visits[b].pageId;
  });
  return order;
}

}  // namespace

std::string_view ToString(TransitionType type) {
  return kTransitionNames[static_cast<size_t>(type)];
}

std::string_view ToString(ReferrerMethod method) {
  return kReferrerMethodNames[static_cast<size_t>(method)];
}

std::vector<PageVisit> TrackVisits(const Trace& trace,
                                   std::span<const MatchPattern> scope,
                                   const TrackOptions& options) {
  return VisitTracker(scope, options).Run(trace);
}

const std::vector<PageId>& VisitGraph::Children(PageId page) const {
  static const std::vector<PageId> kNone;
  auto it = children_.find(page);
  return it == children_.end() ? kNone : it->second;
}

std::vector<std::pair<PageId, PageId>> VisitGraph::Edges() const {
  std::vector<std::pair<PageId, PageId>> edges;
  for (const auto& [parent, kids] : children_) {
    for (PageId child : kids)
      edges.emplace_back(parent, child);
  }
  return edges;
}

size_t VisitGraph::edge_count() const {
  size_t n = 0;
  for (const auto& [parent, kids] : children_)
    n += kids.size();
  return n;
}

VisitGraph BuildDag(std::vector<PageVisit> visits) {
  using Kind = GraphError::Kind;
  VisitGraph graph;
  std::map<PageId, size_t> in_degree;
  for (const PageVisit& v : visits) {
    if (!in_degree.emplace(v.pageId, 0).second) {
      throw GraphError(Kind::kDuplicatePageId,
                       "duplicate page id " + std::to_string(ToInt(v.pageId)));
    }
  }
  for (const PageVisit& v : visits) {
    if (!v.priorPageId)
      continue;
    if (!in_degree.count(*v.priorPageId)) {
      throw GraphError(Kind::kUnknownPriorPage,
                       "unknown prior page " + std::to_string(ToInt(*v.priorPageId)));
    }
    graph.children_[*v.priorPageId].push_back(v.pageId);
    ++in_degree[v.pageId];
  }

  std::deque<PageId> ready;
  for (const auto& [page, degree] : in_degree) {
    if (degree == 0)
      ready.push_back(page);
  }
  while (!ready.empty()) {
    const PageId page = ready.front();
    ready.pop_front();
    graph.order_.push_back(page);
    for (PageId child : graph.Children(page)) {
      if (--in_degree[child] == 0)
        ready.push_back(child);
    }
  }
  if (graph.order_.size() != visits.size())
    throw GraphError(Kind::kCycleDetected, "logical referrer graph has a cycle");
  graph.nodes_ = std::move(visits);
  return graph;
}

std::map<PageId, std::optional<std::string>> ReferrerBaseline(
    ReferrerMethod method, std::span<const PageVisit> visits, Millis capMs) {
  std::map<PageId, std::optional<std::string>> out;
  const std::vector<size_t> order = StartOrder(visits);

  switch (method) {
    case ReferrerMethod::kLoadOrder:
      for (size_t k = 0; k < order.size(); ++k) {
        const PageVisit& v = visits[order[k]];
        std::optional<std::string>& slot = out[v.pageId];
        if (k == 0)
          continue;
        const PageVisit& previous = visits[order[k - 1]];
        if (v.startTime - previous.startTime <= capMs)
          slot = previous.url;
      }
      break;

    case ReferrerMethod::kHttpReferrer:
      for (const PageVisit& v : visits)
        out[v.pageId] = v.httpReferrer;
      break;

    case ReferrerMethod::kHistory: {
      // Browser history keeps one entry per URL; an origin-only referrer is
      // resolved to the most recent history entry on that origin.
      std::map<std::string, Millis> by_url;
      std::map<std::string, std::pair<Millis, std::string>> by_origin;
      for (size_t index : order) {
        const PageVisit& v = visits[index];
        std::optional<std::string>& slot = out[v.pageId];
        if (v.httpReferrer) {
          const std::string& ref = *v.httpReferrer;
          if (by_url.count(ref)) {
            slot = ref;
          } else if (OriginOf(ref) == ref) {
            auto it = by_origin.find(ref);
            if (it != by_origin.end())
              slot = it->second.second;
          }
        }
        by_url[v.url] = v.startTime;
        by_origin[OriginOf(v.url)] = {v.startTime, v.url};
      }
      break;
    }
  }
  return out;
}

std::map<PageId, std::optional<std::string>> WebScienceReferrers(
    std::span<const PageVisit> visits) {
  std::map<PageId, const PageVisit*> by_id;
  for (const PageVisit& v : visits)
    by_id[v.pageId] = &v;
  std::map<PageId, std::optional<std::string>> out;
  for (const PageVisit& v : visits) {
    std::optional<std::string>& slot = out[v.pageId];
    if (v.priorPageId) {
      auto it = by_id.find(*v.priorPageId);
      if (it != by_id.end())
        slot = it->second->url;
    }
  }
  return out;
}

ComparisonCounts& ComparisonCounts::operator+=(const ComparisonCounts& other) {
  neither += other.neither;
  onlyOther += other.onlyOther;
  onlyWebScience += other.onlyWebScience;
  fullMatch += other.fullMatch;
  partialOrNoMatch += other.partialOrNoMatch;
  partial += other.partial;
  noMatch += other.noMatch;
  return *this;
}

ComparisonCounts CompareReferrers(std::span<const PageVisit> visits,
                                  ReferrerMethod method, Millis capMs) {
  const auto ours = WebScienceReferrers(visits);
  const auto theirs = ReferrerBaseline(method, visits, capMs);
  ComparisonCounts counts;
  for (const PageVisit& v : visits) {
    const std::optional<std::string>& a = ours.at(v.pageId);
    const std::optional<std::string>& b = theirs.at(v.pageId);
    if (!a && !b) {
      ++counts.neither;
    } else if (!a) {
      ++counts.onlyOther;
    } else if (!b) {
      ++counts.onlyWebScience;
    } else if (*a == *b) {
      ++counts.fullMatch;
    } else {
      ++counts.partialOrNoMatch;
      if (RegistrableDomain(ParseUrl(*a).host) == RegistrableDomain(ParseUrl(*b).host))
        ++counts.partial;
      else
        ++counts.noMatch;
    }
  }
  return counts;
}

}  // namespace webmeter
