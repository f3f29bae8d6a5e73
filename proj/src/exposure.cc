#include "webmeter/exposure.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "webmeter/timeline.h"
#include "webmeter/url.h"

namespace webmeter {

namespace {

constexpr std::string_view kCategoryNames[] = {
    "news", "health", "misinfo", "aggregator", "factcheck",
    "portal", "search", "social", "webmail"};

std::string Trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string(b, e) : std::string();
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string ResolveOrNormalize(std::string_view url, const RedirectMap* redirects) {
  if (redirects && !redirects->empty())
    return ResolveLink(url, *redirects);
  return NormalizeUrl(url);
}

struct OpenSpan {
  Millis begin = 0;
  std::int64_t areaPx = 0;
  std::string sourceUrl;
};

}  // namespace

std::string_view ToString(DomainCategory category) {
  return kCategoryNames[static_cast<size_t>(category)];
}

std::optional<DomainCategory> ParseCategory(std::string_view text) {
  for (size_t i = 0; i < std::size(kCategoryNames); ++i) {
    if (kCategoryNames[i] == text)
      return static_cast<DomainCategory>(i);
  }
  return std::nullopt;
}

std::string CategoryLabel(std::optional<DomainCategory> category) {
  return std::string(category ? ToString(*category) : kUntrackedLabel);
}

std::vector<std::string> CategoryLabels() {
  std::vector<std::string> labels;
  for (DomainCategory c : kAllCategories)
    labels.emplace_back(ToString(c));
  labels.emplace_back(kUntrackedLabel);
  return labels;
}

void DomainLists::Add(DomainCategory category, std::string_view domain) {
  categories_[category].insert(Lower(domain));
}

void DomainLists::Validate() const {
  std::map<std::string, DomainCategory> owner;
  for (const auto& [category, domains] : categories_) {
    for (const std::string& d : domains) {
      auto [it, inserted] = owner.emplace(d, category);
      if (!inserted) {
        throw DomainListError(DomainListError::Kind::kOverlappingLists,
                              d + " is listed as both " +
                                  std::string(ToString(it->second)) + " and " +
                                  std::string(ToString(category)));
      }
    }
  }
}

std::optional<DomainLists::Match> DomainLists::ClassifyHost(std::string_view host) const {
  std::optional<Match> best;
  for (const auto& [category, domains] : categories_) {
    // Walk the host's suffixes: a.b.c.com, b.c.com, c.com, com.
    std::string_view suffix = host;
    while (!suffix.empty()) {
      if (domains.count(std::string(suffix))) {
        if (!best || suffix.size() > best->domain.size())
          best = Match{category, std::string(suffix)};
        break;
      }
      const size_t dot = suffix.find('.');
      if (dot == std::string_view::npos)
        break;
      suffix.remove_prefix(dot + 1);
    }
  }
  return best;
}

std::optional<DomainLists::Match> DomainLists::ClassifyUrl(std::string_view url) const {
  try {
    return ClassifyHost(ParseUrl(url).host);
  } catch (const InvalidUrl&) {
    return std::nullopt;
  }
}

std::set<std::string> DomainLists::AllDomains() const {
  std::set<std::string> all;
  for (const auto& [category, domains] : categories_)
    all.insert(domains.begin(), domains.end());
  return all;
}

DomainLists ParseDomainLists(std::string_view csv) {
  using Kind = DomainListError::Kind;
  DomainLists lists;
  std::istringstream in{std::string(csv)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty())
      continue;
    const size_t comma = trimmed.find(',');
    if (comma == std::string::npos) {
      throw DomainListError(Kind::kMalformedLine,
                            "line " + std::to_string(number) + ": expected category,domain");
    }
    const std::string category = Trim(std::string_view(trimmed).substr(0, comma));
    const std::string domain = Trim(std::string_view(trimmed).substr(comma + 1));
    if (number == 1 && category == "category" && domain == "domain")
      continue;
    auto parsed = ParseCategory(category);
    if (!parsed)
      throw DomainListError(Kind::kBadCategory, "unknown category '" + category + "'");
    if (domain.empty() || domain.find(',') != std::string::npos) {
      throw DomainListError(Kind::kMalformedLine,
                            "line " + std::to_string(number) + ": bad domain");
    }
    lists.Add(*parsed, domain);
  }
  lists.Validate();
  return lists;
}

DomainLists LoadDomainLists(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read domain lists " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseDomainLists(buffer.str());
}

std::string SerializeDomainLists(const DomainLists& lists) {
  std::string out = "category,domain\n";
  for (const auto& [category, domains] : lists.categories()) {
    for (const std::string& d : domains)
      out += std::string(ToString(category)) + "," + d + "\n";
  }
  return out;
}

void RedirectMap::Add(std::string_view from, std::string_view to) {
  map_[NormalizeUrl(from)] = std::string(to);
}

const std::string* RedirectMap::Find(const std::string& normalized) const {
  auto it = map_.find(normalized);
  return it == map_.end() ? nullptr : &it->second;
}

std::string ResolveLink(std::string_view url, const RedirectMap& redirects,
                        int maxDepth) {
  using Kind = LinkResolutionError::Kind;
  if (maxDepth < 1)
    throw std::invalid_argument("maxDepth must be at least 1");
  std::string current = NormalizeUrl(url);
  std::set<std::string> seen = {current};
  for (int hops = 0;; ++hops) {
    const std::string* next = redirects.Find(current);
    if (!next)
      return current;
    if (hops == maxDepth)
      throw LinkResolutionError(Kind::kDepthExceeded, "too many redirects from " +
                                                          std::string(url));
    std::string target = NormalizeUrl(*next);
    if (!seen.insert(target).second)
      throw LinkResolutionError(Kind::kRedirectCycle, "redirect cycle at " + target);
    current = std::move(target);
  }
}

ExposureResult DetectExposures(const Trace& trace, const DomainLists& lists,
                               const ExposureOptions& options) {
  ExposureResult result;
  result.participantId = trace.participantId;

  std::map<TabId, std::vector<Interval>> on_screen;
  for (const ActivePageSpan& span : ActivePageSpans(trace))
    on_screen[span.tab].push_back(span.span);

  std::map<TabId, std::string> page_url;
  std::map<TabId, WindowId> tab_window;
  std::map<std::pair<TabId, std::string>, OpenSpan> open;

  auto finish = [&](TabId tab, const std::string& link, const OpenSpan& span, Millis end) {
    if (span.areaPx < options.minAreaPx)
      return;
    Millis visible = 0;
    if (auto it = on_screen.find(tab); it != on_screen.end())
      visible = OverlapWith(it->second, Interval{span.begin, end});
    if (visible < options.minVisibleMs)
      return;

    const auto source = lists.ClassifyUrl(span.sourceUrl);
    const std::string source_label =
        CategoryLabel(source ? std::optional(source->category) : std::nullopt);
    const auto exposed = lists.ClassifyUrl(ResolveOrNormalize(link, options.redirects));
    if (!exposed) {
      ++result.untrackedCount;
      ++result.untrackedBySource[source_label];
      return;
    }
    ExposureRecord record;
    record.t = span.begin;
    if (source)
      record.sourceDomain = source->domain;
    record.exposedDomain = exposed->domain;
    record.sourceCategory = source_label;
    record.exposedCategory = std::string(ToString(exposed->category));
    result.records.push_back(std::move(record));
  };

  auto close_tab = [&](TabId tab, Millis t) {
    for (auto it = open.begin(); it != open.end();) {
      if (it->first.first == tab) {
        finish(tab, it->first.second, it->second, t);
        it = open.erase(it);
      } else {
        ++it;
      }
    }
  };

  for (const TraceEvent& event : trace.events) {
    const Millis t = event.t;
    if (const auto* e = std::get_if<TabOpened>(&event.kind)) {
      tab_window[e->tabId] = e->windowId;
    } else if (const auto* e = std::get_if<PageLoad>(&event.kind)) {
      close_tab(e->tabId, t);
      page_url[e->tabId] = e->url;
    } else if (const auto* e = std::get_if<HistoryStateUpdate>(&event.kind)) {
      close_tab(e->tabId, t);
      page_url[e->tabId] = e->newUrl;
    } else if (const auto* e = std::get_if<LinkVisible>(&event.kind)) {
      const std::string link = NormalizeUrl(e->url);
      open.try_emplace({e->tabId, link}, OpenSpan{t, e->areaPx, page_url[e->tabId]});
    } else if (const auto* e = std::get_if<LinkHidden>(&event.kind)) {
      auto it = open.find({e->tabId, NormalizeUrl(e->url)});
      if (it != open.end()) {
        finish(e->tabId, it->first.second, it->second, t);
        open.erase(it);
      }
    } else if (const auto* e = std::get_if<TabClosed>(&event.kind)) {
      close_tab(e->tabId, t);
    } else if (const auto* e = std::get_if<WindowClosed>(&event.kind)) {
      for (const auto& [tab, window] : tab_window) {
        if (window == e->windowId)
          close_tab(tab, t);
      }
    } else if (std::holds_alternative<BrowserShutdown>(event.kind)) {
      while (!open.empty())
        close_tab(open.begin()->first.first, t);
    }
  }
  return result;
}

ShareResult TrackShares(const Trace& trace, const DomainLists& lists,
                        const RedirectMap* redirects) {
  ShareResult result;
  result.participantId = trace.participantId;
  std::set<std::string> visited;
  for (const TraceEvent& event : trace.events) {
    if (const auto* e = std::get_if<PageLoad>(&event.kind)) {
      visited.insert(NormalizeUrl(e->url));
      continue;
    }
    if (const auto* e = std::get_if<HistoryStateUpdate>(&event.kind)) {
      visited.insert(NormalizeUrl(e->newUrl));
      continue;
    }
    const auto* share = std::get_if<SocialShare>(&event.kind);
    if (!share || !share->url)
      continue;
    const std::string original = NormalizeUrl(*share->url);
    const std::string resolved = ResolveOrNormalize(*share->url, redirects);
    const auto match = lists.ClassifyUrl(resolved);
    if (!match) {
      ++result.untrackedShareCount;
      continue;
    }
    ShareRecord record;
    record.t = event.t;
    record.platform = share->platform;
    record.action = share->action;
    record.audience = share->audience;
    record.reshare = share->reshare;
    record.sharedCategory = std::string(ToString(match->category));
    record.sharedDomain = match->domain;
    record.visitedBefore = visited.count(original) > 0 || visited.count(resolved) > 0;
    result.records.push_back(std::move(record));
  }
  return result;
}

StudySummary SummarizeStudy(std::span<const ExposureResult> exposures,
                            std::span<const ShareResult> shares,
                            std::span<const PageVisit> visits,
                            const DomainLists& lists) {
  const std::vector<std::string> labels = CategoryLabels();
  StudySummary summary;
  std::map<std::string, std::map<std::string, std::set<std::string>>> users;
  CategoryMatrix counts;
  for (const std::string& row : labels) {
    for (const std::string& column : labels) {
      summary.usersExposed[row][column] = 0;
      summary.exposureShare[row][column] = 0;
      counts[row][column] = 0;
    }
    summary.visitsByCategory[row] = 0;
    summary.sharesByCategory[row] = 0;
  }

  for (const ExposureResult& result : exposures) {
    for (const ExposureRecord& record : result.records) {
      counts[record.sourceCategory][record.exposedCategory] += 1;
      users[record.sourceCategory][record.exposedCategory].insert(result.participantId);
    }
    const std::string untracked(kUntrackedLabel);
    for (const auto& [source, n] : result.untrackedBySource) {
      counts[source][untracked] += static_cast<double>(n);
      if (n > 0)
        users[source][untracked].insert(result.participantId);
    }
  }
  for (const auto& [row, columns] : users) {
    for (const auto& [column, who] : columns)
      summary.usersExposed[row][column] = static_cast<double>(who.size());
  }
  for (const auto& [row, columns] : counts) {
    double total = 0;
    for (const auto& [column, n] : columns)
      total += n;
    if (total == 0)
      continue;
    for (const auto& [column, n] : columns)
      summary.exposureShare[row][column] = n / total * 100.0;
  }

  for (const PageVisit& v : visits) {
    const auto match = lists.ClassifyUrl(v.url);
    ++summary.visitsByCategory[CategoryLabel(match ? std::optional(match->category)
                                                   : std::nullopt)];
  }
  for (const ShareResult& result : shares) {
    for (const ShareRecord& record : result.records)
      ++summary.sharesByCategory[record.sharedCategory];
    summary.sharesByCategory[std::string(kUntrackedLabel)] += result.untrackedShareCount;
  }
  return summary;
}

}  // namespace webmeter
