#ifndef WEBMETER_REPORT_H_
#define WEBMETER_REPORT_H_

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webmeter/attention.h"
#include "webmeter/exposure.h"
#include "webmeter/navigation.h"

namespace webmeter {

// Shortest text that parses back to the same double.
std::string FormatNumber(double value);

// RFC 4180 quoting, only where needed.
std::string CsvField(std::string_view text);
std::string CsvLine(const std::vector<std::string>& fields);
// Splits one CSV line (no embedded newlines).
std::vector<std::string> SplitCsvLine(std::string_view line);

class ReportParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Visit records under the PageVisit field names.
std::string VisitsCsv(std::span<const PageVisit> visits);
std::string VisitsJson(std::span<const PageVisit> visits);

// participantId, pageId, method, a_ms, e_pct, d_pct, ageGroup
std::string ComparisonsCsv(std::span<const AttentionComparison> rows);
std::string ComparisonsJson(std::span<const AttentionComparison> rows);

struct ReferrerRow {
  std::string participantId;
  PageId pageId{};
  std::string method;  // "webscience" or a ReferrerMethod name
  std::optional<std::string> referrer;
};

std::string ReferrersCsv(std::span<const ReferrerRow> rows);
std::string ReferrersJson(std::span<const ReferrerRow> rows);

// Proportion of visits whose error reaches each threshold, per method.
std::string ThresholdCsv(const ErrorReport& report);
// Median error per age group and method.
std::string AgeMediansCsv(const ErrorReport& report);
// d histogram counts per method; the .dat flavour is whitespace separated
// with a "#" header for gnuplot.
std::string HistogramCsv(const ErrorReport& report);
std::string HistogramDat(const ErrorReport& report);

std::string ReferrerComparisonCsv(const std::map<ReferrerMethod, ComparisonCounts>& counts);

// Square matrix with CategoryLabels() rows and columns.
std::string MatrixCsv(const CategoryMatrix& matrix);
CategoryMatrix ParseMatrixCsv(std::string_view csv);

std::string CountsCsv(std::string_view keyHeader,
                      const std::map<std::string, std::int64_t>& counts);

}  // namespace webmeter

#endif  // WEBMETER_REPORT_H_
