#ifndef WEBMETER_CLOCK_H_
#define WEBMETER_CLOCK_H_

#include <stdexcept>
#include <vector>

#include "webmeter/ids.h"
#include "webmeter/trace.h"

namespace webmeter {

// Study clock: synced once to the system clock at BrowserStartup, then
// advanced only by the monotonic session clock. System clock adjustments are
// observed and ignored.
class StudyClock {
 public:
  void Observe(const TraceEvent& event);

  // Study timestamp for an event already passed to Observe().
  Millis Now() const { return base_system_ms_ + elapsed_ms_; }

  Millis base_system_ms() const { return base_system_ms_; }
  Millis ignored_shift_ms() const { return ignored_shift_ms_; }

 private:
  Millis base_system_ms_ = 0;
  Millis elapsed_ms_ = 0;
  Millis ignored_shift_ms_ = 0;
};

// One study timestamp per event, non-decreasing.
std::vector<Millis> MonotonicTimestamps(const Trace& trace);

class BadConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct IdleSchedule {
  Millis intervalMs = 0;
  Millis idleThresholdMs = 15000;
  // Negative means "half the interval".
  Millis maxDeferralMs = -1;
};

// Periodic task firings over the session. The n-th task is due one interval
// after the previous firing (the first one interval after session start) and
// runs at the first idle moment in [due, due + maxDeferral], or at
// due + maxDeferral when the user never goes idle. Firings after
// BrowserShutdown are dropped. Returns trace-relative times.
std::vector<Millis> ScheduleIdleTasks(const Trace& trace, const IdleSchedule& config);

}  // namespace webmeter

#endif  // WEBMETER_CLOCK_H_
