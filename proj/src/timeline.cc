#include "webmeter/timeline.h"

#include <algorithm>
#include <map>
#include <optional>

namespace webmeter {

std::vector<ActivePageSpan> ActivePageSpans(const Trace& trace) {
  std::vector<ActivePageSpan> spans;
  std::optional<WindowId> focused;
  std::map<WindowId, TabId> selected;
  std::map<TabId, WindowId> tab_window;

  auto current = [&]() -> std::optional<std::pair<WindowId, TabId>> {
    if (!focused)
      return std::nullopt;
    auto it = selected.find(*focused);
    if (it == selected.end())
      return std::nullopt;
    return std::make_pair(*focused, it->second);
  };

  const auto& events = trace.events;
  for (size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& event = events[i];
    if (std::holds_alternative<BrowserShutdown>(event.kind))
      break;
    if (const auto* e = std::get_if<TabOpened>(&event.kind)) {
      tab_window[e->tabId] = e->windowId;
    } else if (const auto* e = std::get_if<TabActivated>(&event.kind)) {
      selected[e->windowId] = e->tabId;
    } else if (const auto* e = std::get_if<TabClosed>(&event.kind)) {
      auto it = tab_window.find(e->tabId);
      if (it != tab_window.end()) {
        auto sel = selected.find(it->second);
        if (sel != selected.end() && sel->second == e->tabId)
          selected.erase(sel);
        tab_window.erase(it);
      }
    } else if (const auto* e = std::get_if<WindowFocusChanged>(&event.kind)) {
      focused = e->windowId;
    } else if (const auto* e = std::get_if<WindowClosed>(&event.kind)) {
      selected.erase(e->windowId);
      std::erase_if(tab_window,
                    [&](const auto& kv) { return kv.second == e->windowId; });
      if (focused == e->windowId)
        focused.reset();
    }

    if (i + 1 >= events.size())
      break;
    const Millis begin = event.t;
    const Millis end = events[i + 1].t;
    const auto page = current();
    if (!page || end <= begin)
      continue;
    if (!spans.empty() && spans.back().span.end == begin &&
        spans.back().window == page->first && spans.back().tab == page->second) {
      spans.back().span.end = end;
    } else {
      spans.push_back({{begin, end}, page->first, page->second});
    }
  }
  return spans;
}

std::vector<Interval> UserActiveIntervals(const Trace& trace,
                                          Millis idleThresholdMs) {
  std::vector<Interval> active;
  const Millis session_end = trace.EndTime();
  for (const TraceEvent& event : trace.events) {
    if (!std::holds_alternative<InputActivity>(event.kind))
      continue;
    const Millis begin = event.t;
    const Millis end = std::min(event.t + idleThresholdMs, session_end);
    if (end <= begin)
      continue;
    if (!active.empty() && begin <= active.back().end)
      active.back().end = std::max(active.back().end, end);
    else
      active.push_back({begin, end});
  }
  return active;
}

std::vector<Interval> Intersect(std::span<const Interval> a,
                                std::span<const Interval> b) {
  std::vector<Interval> out;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const Millis begin = std::max(a[i].begin, b[j].begin);
    const Millis end = std::min(a[i].end, b[j].end);
    if (begin < end)
      out.push_back({begin, end});
    if (a[i].end < b[j].end)
      ++i;
    else
      ++j;
  }
  return out;
}

Millis TotalLength(std::span<const Interval> intervals) {
  Millis total = 0;
  for (const Interval& x : intervals)
    total += x.length();
  return total;
}

Millis OverlapWith(std::span<const Interval> intervals, Interval window) {
  auto first = std::lower_bound(
      intervals.begin(), intervals.end(), window.begin,
      [](const Interval& x, Millis t) { return x.end <= t; });
  Millis total = 0;
  for (auto it = first; it != intervals.end() && it->begin < window.end; ++it)
    total += std::max<Millis>(0, std::min(it->end, window.end) -
                                     std::max(it->begin, window.begin));
  return total;
}

}  // namespace webmeter
