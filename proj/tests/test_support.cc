#include "test_support.h"

#include <fstream>
#include <map>
#include <sstream>

#include "webmeter/url.h"

namespace webmeter::testing {

namespace fs = std::filesystem;

fs::path DataDir() { return fs::path(WEBMETER_TEST_DATA_DIR); }

Trace LoadFixture(const std::string& name) {
  std::ifstream in(DataDir() / name, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseTrace(buffer.str());
}

TempDir::TempDir(const std::string& tag) {
  std::random_device device;
  path_ = fs::temp_directory_path() /
          ("webmeter-" + tag + "-" + std::to_string(device()) + std::to_string(device()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ignored;
  fs::remove_all(path_, ignored);
}

TraceEvent At(Millis t, EventKind kind) { return TraceEvent{t, std::move(kind)}; }

namespace {

const char* const kUrls[] = {
    "http://a.example/",
    "https://a.example/story?id=4",
    "https://www.b.example/x/y",
    "http://B.example:80/index.html#top",
    "https://c.example:8443/deep/path",
    "https://news.d.example/a%2fb",
    "https://d.example/",
    "http://e.example/page#frag",
};

template <typename T>
const T& Pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<size_t>(0, items.size() - 1)(rng)];
}

}  // namespace

Trace RandomTrace(std::mt19937_64& rng, int maxEvents, Millis stepMs) {
  std::uniform_int_distribution<int> percent(0, 99);
  const auto url = [&] {
    return std::string(kUrls[std::uniform_int_distribution<size_t>(0, std::size(kUrls) - 1)(rng)]);
  };

  Trace trace;
  trace.participantId = "r" + std::to_string(rng() % 100000);
  trace.ageGroup = static_cast<AgeGroup>(rng() % 7);

  std::map<TabId, WindowId> tabs;
  std::int64_t next_tab = 1;
  std::int64_t next_window = 1;
  Millis t = 0;

  auto& events = trace.events;
  events.push_back(At(0, BrowserStartup{1'600'000'000'000 + static_cast<Millis>(rng() % 1'000'000) * stepMs}));
  const auto open_tab = [&](WindowId window) {
    const TabId tab{next_tab++};
    tabs[tab] = window;
    events.push_back(At(t, TabOpened{tab, window}));
    return tab;
  };
  {
    const WindowId window{next_window++};
    const TabId tab = open_tab(window);
    events.push_back(At(t, TabActivated{window, tab}));
    events.push_back(At(t, WindowFocusChanged{window}));
  }

  while (static_cast<int>(events.size()) < maxEvents - 1) {
    // Mostly short gaps, sometimes long enough to go idle.
    const int gap = percent(rng) < 10 ? std::uniform_int_distribution<int>(100, 400)(rng)
                                      : std::uniform_int_distribution<int>(0, 50)(rng);
    t += gap * stepMs;

    if (tabs.empty()) {
      const WindowId window{next_window++};
      const TabId tab = open_tab(window);
      events.push_back(At(t, TabActivated{window, tab}));
      continue;
    }
    std::vector<std::pair<TabId, WindowId>> open(tabs.begin(), tabs.end());
    const auto [tab, window] = Pick(rng, open);

    const int roll = percent(rng);
    if (roll < 28) {
      events.push_back(At(t, InputActivity{}));
    } else if (roll < 40) {
      std::optional<std::string> referrer;
      if (percent(rng) < 50)
        referrer = url();
      events.push_back(At(t, PageLoad{tab, window, url(), referrer}));
    } else if (roll < 48) {
      const std::string target = url();
      const auto disposition = static_cast<Disposition>(rng() % 3);
      events.push_back(At(t, LinkClick{tab, target, disposition}));
      if (percent(rng) < 70) {
        t += std::uniform_int_distribution<int>(0, 20)(rng) * stepMs;
        TabId load_tab = tab;
        WindowId load_window = window;
        if (disposition == Disposition::kNewWindow)
          load_window = WindowId{next_window++};
        if (disposition != Disposition::kSameTab)
          load_tab = open_tab(load_window);
        events.push_back(At(t, PageLoad{load_tab, load_window, target, std::nullopt}));
      }
    } else if (roll < 51) {
      const std::string target = url();
      events.push_back(At(t, AddressBarEntry{tab, target}));
      if (percent(rng) < 80) {
        t += stepMs;
        events.push_back(At(t, PageLoad{tab, window, target, std::nullopt}));
      }
    } else if (roll < 56) {
      events.push_back(At(t, HistoryStateUpdate{tab, url()}));
    } else if (roll < 62) {
      WindowId target = window;
      if (percent(rng) < 30)
        target = WindowId{next_window++};
      open_tab(target);
    } else if (roll < 72) {
      events.push_back(At(t, TabActivated{window, tab}));
    } else if (roll < 75) {
      events.push_back(At(t, TabClosed{tab}));
      tabs.erase(tab);
    } else if (roll < 82) {
      std::optional<WindowId> focus;
      if (percent(rng) < 80)
        focus = window;
      events.push_back(At(t, WindowFocusChanged{focus}));
    } else if (roll < 83) {
      events.push_back(At(t, WindowClosed{window}));
      std::erase_if(tabs, [&](const auto& kv) { return kv.second == window; });
    } else if (roll < 87) {
      events.push_back(At(t, ScrollPosition{tab, std::uniform_int_distribution<int>(0, 100)(rng)}));
    } else if (roll < 93) {
      const std::string link = url();
      events.push_back(At(t, LinkVisible{tab, link, std::uniform_int_distribution<std::int64_t>(0, 10000)(rng)}));
      if (percent(rng) < 70) {
        t += std::uniform_int_distribution<int>(0, 30)(rng) * stepMs;
        events.push_back(At(t, LinkHidden{tab, link}));
      }
    } else if (roll < 96) {
      SocialShare share;
      share.platform = static_cast<SharePlatform>(rng() % 3);
      share.action = static_cast<ShareAction>(rng() % 5);
      share.audience = static_cast<Audience>(rng() % 3);
      share.reshare = percent(rng) < 30;
      if (percent(rng) < 80)
        share.url = url();
      events.push_back(At(t, share));
    } else {
      const Millis delta = std::uniform_int_distribution<Millis>(-3'600'000, 3'600'000)(rng);
      events.push_back(At(t, SystemClockChange{delta / stepMs * stepMs}));
    }
  }
  events.push_back(At(t + std::uniform_int_distribution<int>(0, 50)(rng) * stepMs, BrowserShutdown{}));
  return trace;
}

std::map<PageId, TickAttention> AttentionByTicks(const Trace& trace,
                                                 std::span<const PageVisit> visits,
                                                 Millis idleThresholdMs, Millis tickMs) {
  std::map<size_t, PageId> page_of_event;
  std::map<PageId, TickAttention> out;
  for (const PageVisit& v : visits) {
    page_of_event[v.eventIndex] = v.pageId;
    out[v.pageId] = {};
  }
  std::vector<Millis> inputs;
  for (const TraceEvent& e : trace.events) {
    if (std::holds_alternative<InputActivity>(e.kind))
      inputs.push_back(e.t);
  }

  std::optional<WindowId> focused;
  std::map<WindowId, TabId> selected;
  std::map<TabId, WindowId> window_of;
  std::map<TabId, size_t> loaded;  // tab -> index of its current load event
  size_t next = 0;
  size_t last_input = 0;  // inputs[0, last_input) are at or before the tick
  const Millis end = trace.EndTime();
  for (Millis x = 0; x < end; x += tickMs) {
    for (; next < trace.events.size() && trace.events[next].t <= x; ++next) {
      const EventKind& kind = trace.events[next].kind;
      if (const auto* e = std::get_if<TabOpened>(&kind)) {
        window_of[e->tabId] = e->windowId;
      } else if (const auto* e = std::get_if<TabActivated>(&kind)) {
        selected[e->windowId] = e->tabId;
      } else if (const auto* e = std::get_if<WindowFocusChanged>(&kind)) {
        focused = e->windowId;
      } else if (const auto* e = std::get_if<PageLoad>(&kind)) {
        loaded[e->tabId] = next;
      } else if (const auto* e = std::get_if<HistoryStateUpdate>(&kind)) {
        loaded[e->tabId] = next;
      } else if (const auto* e = std::get_if<TabClosed>(&kind)) {
        const WindowId w = window_of[e->tabId];
        if (selected.count(w) && selected[w] == e->tabId)
          selected.erase(w);
        loaded.erase(e->tabId);
        window_of.erase(e->tabId);
      } else if (const auto* e = std::get_if<WindowClosed>(&kind)) {
        for (auto it = window_of.begin(); it != window_of.end();) {
          if (it->second == e->windowId) {
            loaded.erase(it->first);
            it = window_of.erase(it);
          } else {
            ++it;
          }
        }
        selected.erase(e->windowId);
        if (focused == e->windowId)
          focused.reset();
      }
    }
    while (last_input < inputs.size() && inputs[last_input] <= x)
      ++last_input;
    const bool active = last_input > 0 && x < inputs[last_input - 1] + idleThresholdMs;

    std::optional<TabId> on_screen;
    if (focused && selected.count(*focused))
      on_screen = selected[*focused];
    for (const auto& [tab, event_index] : loaded) {
      auto page = page_of_event.find(event_index);
      if (page == page_of_event.end())
        continue;
      TickAttention& a = out[page->second];
      a.dwell += tickMs;
      if (on_screen == tab) {
        a.simple += tickMs;
        if (active)
          a.webscience += tickMs;
      }
    }
  }
  return out;
}

const std::vector<PatternCase>& PatternConformanceTable() {
  using K = PatternError::Kind;
  static const std::vector<PatternCase> kTable = {
      {"<all_urls>", "http://example.org/", true, {}, ""},
      {"<all_urls>", "https://a.org/some/path/", true, {}, ""},
      {"<all_urls>", "resource://a/b/c/", false, {}, ""},
      {"*://*/*", "http://example.org/", true, {}, ""},
      {"*://*/*", "https://a.org/some/path/", true, {}, ""},
      {"*://*/*", "ftp://ftp.example.org/", false, {}, ""},
      {"*://*/*", "file:///a/", false, {}, ""},
      {"*://*.mozilla.org/*", "http://mozilla.org/", true, {}, ""},
      {"*://*.mozilla.org/*", "https://mozilla.org/", true, {}, ""},
      {"*://*.mozilla.org/*", "http://a.mozilla.org/", true, {}, ""},
      {"*://*.mozilla.org/*", "http://a.b.mozilla.org/", true, {}, ""},
      {"*://*.mozilla.org/*", "https://b.mozilla.org/path/", true, {}, ""},
      {"*://*.mozilla.org/*", "ftp://mozilla.org/", false, {}, ""},
      {"*://*.mozilla.org/*", "http://mozilla.com/", false, {}, ""},
      {"*://*.mozilla.org/*", "http://firefox.org/", false, {}, ""},
      {"*://*.mozilla.org/*", "http://evilmozilla.org/", false, {}, ""},
      {"*://mozilla.org/", "http://mozilla.org/", true, {}, ""},
      {"*://mozilla.org/", "https://mozilla.org/", true, {}, ""},
      {"*://mozilla.org/", "http://a.mozilla.org/", false, {}, ""},
      {"*://mozilla.org/", "http://mozilla.org/a", false, {}, ""},
      {"https://*/path", "https://mozilla.org/path", true, {}, ""},
      {"https://*/path", "https://a.mozilla.org/path", true, {}, ""},
      {"https://*/path", "https://something.com/path", true, {}, ""},
      {"https://*/path", "http://mozilla.org/path", false, {}, ""},
      {"https://*/path", "https://mozilla.org/path/", false, {}, ""},
      {"https://*/path", "https://mozilla.org/a", false, {}, ""},
      {"https://*/path", "https://mozilla.org/", false, {}, ""},
      {"https://*/path", "https://mozilla.org/path?foo=1", true, {},
       "queries are dropped before matching"},
      {"https://*/path/", "https://mozilla.org/path/", true, {}, ""},
      {"https://*/path/", "https://mozilla.org/path", false, {}, ""},
      {"https://mozilla.org/*", "https://mozilla.org/", true, {}, ""},
      {"https://mozilla.org/*", "https://mozilla.org/path/to/doc", true, {}, ""},
      {"https://mozilla.org/*", "https://mozilla.org/path/to/doc?foo=1", true, {}, ""},
      {"https://mozilla.org/*", "http://mozilla.org/path", false, {}, ""},
      {"https://mozilla.org/*", "https://mozilla.com/path", false, {}, ""},
      {"https://mozilla.org/a/b/c/", "https://mozilla.org/a/b/c/", true, {}, ""},
      {"https://mozilla.org/a/b/c/", "https://mozilla.org/a/b/c/#section1", true, {}, ""},
      {"https://mozilla.org/*/b/*/", "https://mozilla.org/a/b/c/", true, {}, ""},
      {"https://mozilla.org/*/b/*/", "https://mozilla.org/d/b/f/", true, {}, ""},
      {"https://mozilla.org/*/b/*/", "https://mozilla.org/a/b/c/d/", true, {}, ""},
      {"https://mozilla.org/*/b/*/", "https://mozilla.org/a/b/c/d/#section1", true, {}, ""},
      {"https://mozilla.org/*/b/*/", "https://mozilla.org/a/b/", false, {}, ""},
      {"https://mozilla.org/*/b/*/", "https://mozilla.org/a/b/c/d/?foo=bar", true, {},
       "queries are dropped before matching"},
      {"http://127.0.0.1/*", "http://127.0.0.1/", true, {}, ""},
      {"http://127.0.0.1/*", "http://127.0.0.1/a/", true, {}, ""},
      {"http://127.0.0.1/*", "https://127.0.0.1/a/", false, {}, ""},
      {"http://127.0.0.1/*", "http://127.0.0.2/a/", false, {}, ""},
      {"*://localhost/*", "http://localhost/", true, {}, ""},
      {"*://localhost/*", "http://localhost:8080/", false, {},
       "a non-default port must appear in the pattern"},
      {"*://localhost:8080/*", "http://localhost:8080/x", true, {}, ""},
      {"*://*.acm.org/*", "https://dl.acm.org/doi/10.1145/3543507", true, {}, ""},
      {"*://*.acm.org/*", "https://acm.org/", true, {}, ""},
      {"https://*.acm.org/*", "http://dl.acm.org/", false, {}, ""},
      {"*://EXAMPLE.org/*", "http://example.org:80/x", true, {}, ""},
      {"resource://path/", "", false, K::kBadScheme, ""},
      {"http*://mozilla.org/", "", false, K::kBadScheme, ""},
      {"ftp://mozilla.org/", "", false, K::kBadScheme,
       "only http, https and * schemes are accepted"},
      {"https://mozilla.org", "", false, K::kMissingPath, ""},
      {"*://*", "", false, K::kMissingPath, ""},
      {"https://mozilla.*.org/", "", false, K::kBadHostWildcard, ""},
      {"https://*zilla.org/", "", false, K::kBadHostWildcard, ""},
      {"https://foo.*.bar/", "", false, K::kBadHostWildcard, ""},
      {"https:///path", "", false, K::kEmptyHost, ""},
      {"https://example.org:99999/", "", false, K::kBadPort, ""},
  };
  return kTable;
}

std::string CheckPatternCase(const PatternCase& c) {
  const std::string label = std::string(c.pattern) + " vs " + c.url;
  try {
    const MatchPattern pattern = ParsePattern(c.pattern);
    if (c.error)
      return label + ": parsed, expected an error";
    const bool got = pattern.Matches(c.url);
    if (got != c.matches)
      return label + ": got " + (got ? "match" : "no match");
    return "";
  } catch (const PatternError& e) {
    if (!c.error)
      return label + ": unexpected error " + e.what();
    if (e.kind() != *c.error)
      return label + ": wrong error kind: " + e.what();
    return "";
  } catch (const InvalidUrl& e) {
    // Non-hierarchical candidates never match.
    if (c.error || c.matches)
      return label + ": " + e.what();
    return "";
  }
}

}  // namespace webmeter::testing
