#include "panel.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "webmeter/clock.h"

namespace webmeter {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kVisitsPrefix = "visits.";

// The most visited category of a window; ties go to the earlier label.
void SetTopCategory(std::map<std::string, PayloadValue>& fields) {
  std::string top;
  std::int64_t best = 0;
  for (const std::string& label : CategoryLabels()) {
    auto it = fields.find(std::string(kVisitsPrefix) + label);
    if (it == fields.end())
      continue;
    const std::int64_t n = std::get<std::int64_t>(it->second);
    if (n > best) {
      best = n;
      top = label;
    }
  }
  if (best > 0)
    fields["topCategory"] = top;
  else
    fields.erase("topCategory");
}

}  // namespace

int ResolveWorkers(std::optional<int> flag) {
  if (flag && *flag > 0)
    return *flag;
  if (const char* env = std::getenv("WEBMETER_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0)
      return static_cast<int>(value);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<fs::path> TraceFiles(const fs::path& input) {
  if (!fs::is_directory(input))
    return {input};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().extension() == kTraceExtension)
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string ReadFileText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileText(const fs::path& path, std::string_view text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
}

PanelLoad LoadPanel(const fs::path& input, int workers) {
  const std::vector<fs::path> files = TraceFiles(input);
  std::vector<std::optional<Trace>> traces(files.size());
  std::vector<std::vector<std::string>> diagnostics(files.size());

  ParallelFor(files.size(), workers, [&](size_t i) {
    const std::string name = files[i].string();
    try {
      Trace trace = DecodeTrace(ReadFileText(files[i]));
      const std::vector<Violation> violations = ValidateTrace(trace);
      for (const Violation& v : violations) {
        // Line 1 is the header record.
        std::string line = name + ":" + std::to_string(v.eventIndex + 2) + ": " +
                           std::string(ToString(v.rule));
        if (!v.detail.empty())
          line += ": " + v.detail;
        diagnostics[i].push_back(std::move(line));
      }
      if (violations.empty())
        traces[i] = std::move(trace);
    } catch (const TraceParseError& e) {
      diagnostics[i].push_back(name + ":" + std::to_string(e.line()) + ": " + e.what());
    } catch (const std::exception& e) {
      diagnostics[i].push_back(name + ": " + e.what());
    }
  });

  PanelLoad load;
  for (size_t i = 0; i < files.size(); ++i) {
    if (traces[i])
      load.traces.push_back({files[i], std::move(*traces[i])});
    for (std::string& d : diagnostics[i])
      load.diagnostics.push_back(std::move(d));
  }
  std::stable_sort(load.traces.begin(), load.traces.end(),
                   [](const LoadedTrace& a, const LoadedTrace& b) {
                     return a.trace.participantId < b.trace.participantId;
                   });
  return load;
}

TraceMeasurement MeasureTrace(const Trace& trace, std::span<const MatchPattern> scope,
                              const AttentionOptions& options) {
  TraceMeasurement m;
  m.visits = TrackVisits(trace, scope);
  m.attention = MeasureAll(trace, m.visits, options);
  FillAttention(m.visits, m.attention);
  m.comparisons = BuildComparisons(trace, m.visits, m.attention);

  std::vector<std::pair<std::string, std::map<PageId, std::optional<std::string>>>> methods;
  methods.emplace_back("webscience", WebScienceReferrers(m.visits));
  for (ReferrerMethod method : kAllReferrerMethods) {
    methods.emplace_back(std::string(ToString(method)), ReferrerBaseline(method, m.visits));
    m.referrerCounts[method] = CompareReferrers(m.visits, method);
  }
  for (const PageVisit& v : m.visits) {
    for (const auto& [name, referrers] : methods) {
      auto it = referrers.find(v.pageId);
      m.referrers.push_back({trace.participantId, v.pageId, name,
                             it == referrers.end() ? std::nullopt : it->second});
    }
  }
  return m;
}

WindowAggregates SessionAggregates(const Trace& trace, std::span<const PageVisit> visits,
                                   const DomainLists& lists, Millis windowMs) {
  StudyClock clock;
  if (!trace.events.empty())
    clock.Observe(trace.events.front());
  const auto window_of = [&](Millis t) {
    return WindowContaining(clock.base_system_ms() + t, windowMs).start;
  };

  WindowAggregates out;
  const auto bump = [&](Millis window, const std::string& field, std::int64_t by) {
    auto [it, inserted] = out[window].try_emplace(field, std::int64_t{0});
    std::get<std::int64_t>(it->second) += by;
  };

  std::map<Millis, Millis> first_visit;
  for (const PageVisit& v : visits) {
    const std::string label = CategoryLabel(
        [&]() -> std::optional<DomainCategory> {
          auto match = lists.ClassifyUrl(v.url);
          return match ? std::optional(match->category) : std::nullopt;
        }());
    const Millis window = window_of(v.startTime);
    bump(window, std::string(kVisitsPrefix) + label, 1);
    bump(window, "attentionMs." + label, v.attentionDurationMs.value_or(0));
    const Millis at = clock.base_system_ms() + v.startTime;
    auto [it, inserted] = first_visit.try_emplace(window, at);
    if (!inserted)
      it->second = std::min(it->second, at);
  }

  const ExposureResult exposures = DetectExposures(trace, lists);
  for (const ExposureRecord& r : exposures.records)
    bump(window_of(r.t), "exposures." + r.exposedCategory, 1);
  const Millis session_window = window_of(0);
  if (exposures.untrackedCount > 0)
    bump(session_window, "exposures." + std::string(kUntrackedLabel), exposures.untrackedCount);

  const ShareResult shares = TrackShares(trace, lists);
  for (const ShareRecord& r : shares.records)
    bump(window_of(r.t), "shares." + r.sharedCategory, 1);
  if (shares.untrackedShareCount > 0)
    bump(session_window, "shares." + std::string(kUntrackedLabel), shares.untrackedShareCount);

  for (auto& [window, fields] : out) {
    auto it = first_visit.find(window);
    if (it != first_visit.end())
      fields["firstVisitHour"] = (it->second - window) / (60 * 60 * 1000);
    SetTopCategory(fields);
  }
  return out;
}

void MergeAggregates(WindowAggregates& into, const WindowAggregates& from) {
  for (const auto& [window, fields] : from) {
    auto& target = into[window];
    for (const auto& [name, value] : fields) {
      const auto* number = std::get_if<std::int64_t>(&value);
      if (!number)
        continue;
      auto [it, inserted] = target.try_emplace(name, *number);
      if (inserted)
        continue;
      auto& existing = std::get<std::int64_t>(it->second);
      existing = name == "firstVisitHour" ? std::min(existing, *number) : existing + *number;
    }
    SetTopCategory(target);
  }
}

}  // namespace webmeter
