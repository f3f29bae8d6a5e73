#ifndef WEBMETER_TIMELINE_H_
#define WEBMETER_TIMELINE_H_

#include <span>
#include <vector>

#include "webmeter/ids.h"
#include "webmeter/trace.h"

namespace webmeter {

// Half-open [begin, end).
struct Interval {
  Millis begin = 0;
  Millis end = 0;
  Millis length() const { return end - begin; }
  bool operator==(const Interval&) const = default;
};

// A span during which |tab| is the selected tab of the focused window.
struct ActivePageSpan {
  Interval span;
  WindowId window{};
  TabId tab{};
};

// Replays focus and tab selection over a valid trace. Spans are disjoint,
// sorted, and never extend past BrowserShutdown.
std::vector<ActivePageSpan> ActivePageSpans(const Trace& trace);

// Union of [s, s + idleThresholdMs) over all InputActivity times s, clipped
// to the session. Outside these intervals the user counts as idle.
std::vector<Interval> UserActiveIntervals(const Trace& trace,
                                          Millis idleThresholdMs);

// Sorted, disjoint intervals intersected with another sorted, disjoint list.
std::vector<Interval> Intersect(std::span<const Interval> a,
                                std::span<const Interval> b);

Millis TotalLength(std::span<const Interval> intervals);

// Sum of |window ∩ x| over x in a sorted, disjoint list.
Millis OverlapWith(std::span<const Interval> intervals, Interval window);

}  // namespace webmeter

#endif  // WEBMETER_TIMELINE_H_
