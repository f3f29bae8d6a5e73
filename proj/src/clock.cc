#include "webmeter/clock.h"

#include <algorithm>

#include "webmeter/timeline.h"

namespace webmeter {

void StudyClock::Observe(const TraceEvent& event) {
  if (const auto* startup = std::get_if<BrowserStartup>(&event.kind))
    base_system_ms_ = startup->systemClockMs - event.t;
  else if (const auto* change = std::get_if<SystemClockChange>(&event.kind))
    ignored_shift_ms_ += change->deltaMs;
  elapsed_ms_ = std::max(elapsed_ms_, event.t);
}

std::vector<Millis> MonotonicTimestamps(const Trace& trace) {
  std::vector<Millis> out;
  out.reserve(trace.events.size());
  StudyClock clock;
  for (const TraceEvent& event : trace.events) {
    clock.Observe(event);
    out.push_back(clock.Now());
  }
  return out;
}

std::vector<Millis> ScheduleIdleTasks(const Trace& trace, const IdleSchedule& config) {
  const Millis deferral =
      config.maxDeferralMs < 0 ? config.intervalMs / 2 : config.maxDeferralMs;
  if (config.intervalMs <= 0 || config.idleThresholdMs <= 0 || deferral <= 0)
    throw BadConfig("interval, idle threshold and max deferral must be positive");

  const std::vector<Interval> active =
      UserActiveIntervals(trace, config.idleThresholdMs);
  const Millis start = trace.events.empty() ? 0 : trace.events.front().t;
  const Millis end = trace.EndTime();

  // Active intervals are merged, so the end of the one containing |t| is the
  // first idle moment at or after |t|.
  auto first_idle_at_or_after = [&](Millis t) {
    auto it = std::upper_bound(active.begin(), active.end(), t,
                               [](Millis v, const Interval& x) { return v < x.end; });
    if (it != active.end() && it->begin <= t)
      return it->end;
    return t;
  };

  std::vector<Millis> firings;
  Millis due = start + config.intervalMs;
  while (due <= end) {
    const Millis fire = std::min(first_idle_at_or_after(due), due + deferral);
    if (fire > end)
      break;
    firings.push_back(fire);
    due = fire + config.intervalMs;
  }
  return firings;
}

}  // namespace webmeter
