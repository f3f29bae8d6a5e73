#ifndef WEBMETER_ATTENTION_H_
#define WEBMETER_ATTENTION_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webmeter/ids.h"
#include "webmeter/navigation.h"
#include "webmeter/trace.h"

namespace webmeter {

enum class AttentionMethod { kWebScience, kDwell, kLoadInterval, kSimple };

inline constexpr AttentionMethod kBaselineMethods[] = {
    AttentionMethod::kDwell, AttentionMethod::kLoadInterval,
    AttentionMethod::kSimple};

std::string_view ToString(AttentionMethod method);

class UnknownMethod : public std::invalid_argument {
 public:
  explicit UnknownMethod(std::string_view name);
};

// Accepts the names printed by ToString(): webscience, dwell, load_interval,
// simple.
AttentionMethod ParseAttentionMethod(std::string_view name);

inline constexpr Millis kDefaultIdleThresholdMs = 15000;
inline constexpr Millis kLoadIntervalCapMs = 30 * 60 * 1000;

struct AttentionOptions {
  Millis idleThresholdMs = kDefaultIdleThresholdMs;
  Millis loadIntervalCapMs = kLoadIntervalCapMs;
};

// Per-visit attention for one method. Only load_interval can be undefined
// (no later page load in the session).
//   webscience: visit's tab selected in the focused window and user active
//   dwell: stopTime - startTime
//   load_interval: time to the next navigation in any tab, capped
//   simple: dwell restricted to spans where the tab is selected and focused
std::map<PageId, std::optional<Millis>> AttentionMeasure(
    AttentionMethod method, const Trace& trace, std::span<const PageVisit> visits,
    const AttentionOptions& options = {});

// All four methods at once, indexed by AttentionMethod.
struct VisitAttention {
  PageId pageId{};
  std::array<std::optional<Millis>, 4> values;

  std::optional<Millis> Get(AttentionMethod m) const {
    return values[static_cast<size_t>(m)];
  }
};

std::vector<VisitAttention> MeasureAll(const Trace& trace,
                                       std::span<const PageVisit> visits,
                                       const AttentionOptions& options = {});

// Copies the webscience value into PageVisit::attentionDurationMs.
void FillAttention(std::vector<PageVisit>& visits,
                   std::span<const VisitAttention> measures);

class ZeroBaseline : public std::domain_error {
 public:
  ZeroBaseline() : std::domain_error("webscience attention is zero") {}
};

// |a_ws - a_m| / a_ws * 100
double ErrorPct(double webscience, double other);
// (a_ws - a_m) / a_ws * -100; negative when the method underestimates.
double SignedDiff(double webscience, double other);

struct AttentionComparison {
  std::string participantId;
  AgeGroup ageGroup = AgeGroup::kUnknown;
  PageId pageId{};
  AttentionMethod method = AttentionMethod::kWebScience;
  Millis a_ms = 0;
  // Empty when the webscience value is zero.
  std::optional<double> e_pct;
  std::optional<double> d_pct;
};

struct ComparisonSet {
  std::vector<AttentionComparison> rows;
  // Visits whose webscience attention is zero; kept out of e/d statistics.
  std::int64_t zeroBaselineVisits = 0;
};

// One row per (visit, method) where the method is defined, webscience rows
// included with e = d = 0.
ComparisonSet BuildComparisons(const Trace& trace, std::span<const PageVisit> visits,
                               std::span<const VisitAttention> measures);

// Histogram of d: 25 ten-point bins covering [-100, 150) and a final bin for
// d >= 150. Values below -100 cannot occur for non-negative attention and are
// clamped into the first bin.
inline constexpr int kHistogramBins = 26;
int HistogramBin(double d_pct);
std::string HistogramBinLabel(int bin);

struct MethodStats {
  AttentionMethod method = AttentionMethod::kDwell;
  std::int64_t visits = 0;
  std::vector<double> proportionAtLeast;  // aligned with thresholds
  std::optional<double> medianError;
  std::map<AgeGroup, double> medianErrorByAge;
  std::array<std::int64_t, kHistogramBins> histogram{};
};

struct ErrorReport {
  std::vector<double> thresholds;
  std::vector<MethodStats> methods;  // dwell, load_interval, simple
  std::int64_t zeroBaselineVisits = 0;
};

// Statistics over baseline rows with a defined error; webscience rows and
// zero-baseline rows are skipped.
ErrorReport ErrorStats(std::span<const AttentionComparison> rows,
                       std::vector<double> thresholds = {1, 10, 25},
                       std::int64_t zeroBaselineVisits = 0);

double Median(std::vector<double> values);

}  // namespace webmeter

#endif  // WEBMETER_ATTENTION_H_
