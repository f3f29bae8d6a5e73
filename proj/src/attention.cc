#include "webmeter/attention.h"

#include <algorithm>
#include <cmath>

#include "webmeter/timeline.h"

namespace webmeter {

namespace {

constexpr std::string_view kMethodNames[] = {"webscience", "dwell",
                                             "load_interval", "simple"};

// Per-tab selected-and-focused intervals.
std::map<TabId, std::vector<Interval>> SelectedIntervalsByTab(const Trace& trace) {
  std::map<TabId, std::vector<Interval>> by_tab;
  for (const ActivePageSpan& span : ActivePageSpans(trace))
    by_tab[span.tab].push_back(span.span);
  return by_tab;
}

std::vector<Millis> NavigationTimes(const Trace& trace,
                                    std::vector<size_t>* indices) {
  std::vector<Millis> times;
  for (size_t i = 0; i < trace.events.size(); ++i) {
    const EventKind& kind = trace.events[i].kind;
    if (std::holds_alternative<PageLoad>(kind) ||
        std::holds_alternative<HistoryStateUpdate>(kind)) {
      times.push_back(trace.events[i].t);
      indices->push_back(i);
    }
  }
  return times;
}

}  // namespace

std::string_view ToString(AttentionMethod method) {
  return kMethodNames[static_cast<size_t>(method)];
}

UnknownMethod::UnknownMethod(std::string_view name)
    : std::invalid_argument("unknown attention method: " + std::string(name)) {}

AttentionMethod ParseAttentionMethod(std::string_view name) {
  for (size_t i = 0; i < std::size(kMethodNames); ++i) {
    if (kMethodNames[i] == name)
      return static_cast<AttentionMethod>(i);
  }
  throw UnknownMethod(name);
}

std::vector<VisitAttention> MeasureAll(const Trace& trace,
                                       std::span<const PageVisit> visits,
                                       const AttentionOptions& options) {
  const auto selected = SelectedIntervalsByTab(trace);
  const std::vector<Interval> active =
      UserActiveIntervals(trace, options.idleThresholdMs);
  std::vector<size_t> nav_indices;
  const std::vector<Millis> nav_times = NavigationTimes(trace, &nav_indices);

  std::vector<VisitAttention> out;
  out.reserve(visits.size());
  for (const PageVisit& v : visits) {
    VisitAttention m;
    m.pageId = v.pageId;
    const Interval lifetime{v.startTime, v.stopTime};

    Millis simple = 0;
    Millis webscience = 0;
    if (auto it = selected.find(v.tabId); it != selected.end()) {
      const std::vector<Interval> seen =
          Intersect(it->second, std::span<const Interval>(&lifetime, 1));
      simple = TotalLength(seen);
      webscience = TotalLength(Intersect(seen, active));
    }
    m.values[static_cast<size_t>(AttentionMethod::kWebScience)] = webscience;
    m.values[static_cast<size_t>(AttentionMethod::kSimple)] = simple;
    m.values[static_cast<size_t>(AttentionMethod::kDwell)] = v.stopTime - v.startTime;

    // Next navigation event after the one that started this visit.
    auto next = std::upper_bound(nav_indices.begin(), nav_indices.end(), v.eventIndex);
    if (next != nav_indices.end()) {
      const Millis interval =
          nav_times[static_cast<size_t>(next - nav_indices.begin())] - v.startTime;
      m.values[static_cast<size_t>(AttentionMethod::kLoadInterval)] =
          std::min(interval, options.loadIntervalCapMs);
    }
    out.push_back(m);
  }
  return out;
}

std::map<PageId, std::optional<Millis>> AttentionMeasure(
    AttentionMethod method, const Trace& trace, std::span<const PageVisit> visits,
    const AttentionOptions& options) {
  std::map<PageId, std::optional<Millis>> out;
  for (const VisitAttention& m : MeasureAll(trace, visits, options))
    out[m.pageId] = m.Get(method);
  return out;
}

void FillAttention(std::vector<PageVisit>& visits,
                   std::span<const VisitAttention> measures) {
  std::map<PageId, std::optional<Millis>> by_id;
  for (const VisitAttention& m : measures)
    by_id[m.pageId] = m.Get(AttentionMethod::kWebScience);
  for (PageVisit& v : visits) {
    if (auto it = by_id.find(v.pageId); it != by_id.end())
      v.attentionDurationMs = it->second;
  }
}

double ErrorPct(double webscience, double other) {
  if (webscience == 0)
    throw ZeroBaseline();
  return std::abs(webscience - other) / webscience * 100.0;
}

double SignedDiff(double webscience, double other) {
  if (webscience == 0)
    throw ZeroBaseline();
  return (webscience - other) / webscience * -100.0;
}

ComparisonSet BuildComparisons(const Trace& trace, std::span<const PageVisit> visits,
                               std::span<const VisitAttention> measures) {
  ComparisonSet set;
  std::map<PageId, const VisitAttention*> by_id;
  for (const VisitAttention& m : measures)
    by_id[m.pageId] = &m;

  constexpr AttentionMethod kOrder[] = {
      AttentionMethod::kWebScience, AttentionMethod::kDwell,
      AttentionMethod::kLoadInterval, AttentionMethod::kSimple};
  for (const PageVisit& v : visits) {
    auto it = by_id.find(v.pageId);
    if (it == by_id.end())
      continue;
    const VisitAttention& m = *it->second;
    const Millis ws = *m.Get(AttentionMethod::kWebScience);
    if (ws == 0)
      ++set.zeroBaselineVisits;
    for (AttentionMethod method : kOrder) {
      const std::optional<Millis> value = m.Get(method);
      if (!value)
        continue;
      AttentionComparison row;
      row.participantId = trace.participantId;
      row.ageGroup = trace.ageGroup;
      row.pageId = v.pageId;
      row.method = method;
      row.a_ms = *value;
      if (ws > 0) {
        row.e_pct = ErrorPct(static_cast<double>(ws), static_cast<double>(*value));
        row.d_pct = SignedDiff(static_cast<double>(ws), static_cast<double>(*value));
      }
      set.rows.push_back(std::move(row));
    }
  }
  return set;
}

int HistogramBin(double d_pct) {
  if (d_pct >= 150.0)
    return kHistogramBins - 1;
  const int bin = static_cast<int>(std::floor((d_pct + 100.0) / 10.0));
  return std::clamp(bin, 0, kHistogramBins - 2);
}

std::string HistogramBinLabel(int bin) {
  if (bin == kHistogramBins - 1)
    return ">150";
  return std::to_string(-100 + 10 * bin);
}

double Median(std::vector<double> values) {
  if (values.empty())
    return 0.0;
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2.0;
}

ErrorReport ErrorStats(std::span<const AttentionComparison> rows,
                       std::vector<double> thresholds,
                       std::int64_t zeroBaselineVisits) {
  ErrorReport report;
  report.thresholds = std::move(thresholds);
  report.zeroBaselineVisits = zeroBaselineVisits;

  for (AttentionMethod method : kBaselineMethods) {
    MethodStats stats;
    stats.method = method;
    std::vector<double> errors;
    std::map<AgeGroup, std::vector<double>> by_age;
    std::vector<std::int64_t> at_least(report.thresholds.size(), 0);
    for (const AttentionComparison& row : rows) {
      if (row.method != method || !row.e_pct)
        continue;
      errors.push_back(*row.e_pct);
      by_age[row.ageGroup].push_back(*row.e_pct);
      for (size_t k = 0; k < report.thresholds.size(); ++k) {
        if (*row.e_pct >= report.thresholds[k])
          ++at_least[k];
      }
      ++stats.histogram[static_cast<size_t>(HistogramBin(*row.d_pct))];
    }
    stats.visits = static_cast<std::int64_t>(errors.size());
    for (std::int64_t count : at_least) {
      stats.proportionAtLeast.push_back(
          errors.empty() ? 0.0
                         : static_cast<double>(count) / static_cast<double>(errors.size()));
    }
    if (!errors.empty())
      stats.medianError = Median(std::move(errors));
    for (auto& [group, values] : by_age)
      stats.medianErrorByAge[group] = Median(std::move(values));
    report.methods.push_back(std::move(stats));
  }
  return report;
}

}  // namespace webmeter
