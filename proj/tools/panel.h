#ifndef WEBMETER_TOOLS_PANEL_H_
#define WEBMETER_TOOLS_PANEL_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "webmeter/attention.h"
#include "webmeter/exposure.h"
#include "webmeter/match_pattern.h"
#include "webmeter/navigation.h"
#include "webmeter/privacy.h"
#include "webmeter/report.h"
#include "webmeter/trace.h"

namespace webmeter {

inline constexpr std::string_view kTraceExtension = ".trace";

// --workers, then WEBMETER_WORKERS, then the hardware thread count.
int ResolveWorkers(std::optional<int> flag);

// Runs fn(i) for i in [0, n) on |workers| threads. Callers write results into
// slot i, so output order never depends on scheduling.
template <typename Fn>
void ParallelFor(size_t n, int workers, Fn&& fn) {
  const size_t threads = std::min<size_t>(n, static_cast<size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++)
        fn(i);
    });
  }
  for (std::thread& thread : pool)
    thread.join();
}

// A directory yields its *.trace files in name order; a file yields itself.
std::vector<std::filesystem::path> TraceFiles(const std::filesystem::path& input);

struct LoadedTrace {
  std::filesystem::path path;
  Trace trace;
};

struct PanelLoad {
  // Sorted by participantId, then path.
  std::vector<LoadedTrace> traces;
  // "file:line: message" lines for traces that failed to decode or validate.
  std::vector<std::string> diagnostics;
};

PanelLoad LoadPanel(const std::filesystem::path& input, int workers);

struct TraceMeasurement {
  std::vector<PageVisit> visits;  // attentionDurationMs filled
  std::vector<VisitAttention> attention;
  ComparisonSet comparisons;
  std::vector<ReferrerRow> referrers;
  std::map<ReferrerMethod, ComparisonCounts> referrerCounts;
};

TraceMeasurement MeasureTrace(const Trace& trace, std::span<const MatchPattern> scope,
                              const AttentionOptions& options = {});

// Per-window aggregate fields of one session, keyed by window start:
//   visits.<category>, attentionMs.<category>, exposures.<category>,
//   shares.<category>, topCategory, firstVisitHour.
// Counts without a timestamp (untracked exposures and shares) land in the
// window holding the session start.
using WindowAggregates = std::map<Millis, std::map<std::string, PayloadValue>>;

WindowAggregates SessionAggregates(const Trace& trace, std::span<const PageVisit> visits,
                                   const DomainLists& lists,
                                   Millis windowMs = kDefaultAggregationWindowMs);

// Folds another session of the same participant into |into|: counts add,
// firstVisitHour keeps the minimum, topCategory is recomputed.
void MergeAggregates(WindowAggregates& into, const WindowAggregates& from);

std::string ReadFileText(const std::filesystem::path& path);
void WriteFileText(const std::filesystem::path& path, std::string_view text);

}  // namespace webmeter

#endif  // WEBMETER_TOOLS_PANEL_H_
