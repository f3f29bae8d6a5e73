#include "webmeter/report.h"

#include <charconv>
#include <sstream>

#include "json.hpp"

namespace webmeter {

namespace {

using OrderedJson = nlohmann::ordered_json;

template <typename T>
std::string OptionalText(const std::optional<T>& value) {
  if (!value)
    return "";
  if constexpr (std::is_same_v<T, std::string>)
    return *value;
  else
    return std::to_string(ToInt(*value));
}

std::string OptionalNumber(const std::optional<double>& value) {
  return value ? FormatNumber(*value) : "";
}

template <typename T>
OrderedJson OptionalJson(const std::optional<T>& value) {
  if (!value)
    return nullptr;
  if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, double> ||
                std::is_same_v<T, Millis>)
    return *value;
  else
    return ToInt(*value);
}


}  // namespace

std::string FormatNumber(double value) {
  if (value == 0)
    return "0";  // also folds -0
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::string CsvField(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvLine(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i)
      line += ',';
    line += CsvField(fields[i]);
  }
  line += '\n';
  return line;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted)
    throw ReportParseError("unterminated quote");
  return fields;
}

std::string VisitsCsv(std::span<const PageVisit> visits) {
  std::string out = CsvLine({"pageId", "tabId", "windowId", "url", "httpReferrer",
                             "priorPageId", "transitionType", "transitionQualifier",
                             "startTime", "stopTime", "maxScrollDepth",
                             "attentionDurationMs"});
  for (const PageVisit& v : visits) {
    out += CsvLine({std::to_string(ToInt(v.pageId)), std::to_string(ToInt(v.tabId)),
                    std::to_string(ToInt(v.windowId)), v.url, OptionalText(v.httpReferrer),
                    OptionalText(v.priorPageId), std::string(ToString(v.transitionType)),
                    OptionalText(v.transitionQualifier), std::to_string(v.startTime),
                    std::to_string(v.stopTime), std::to_string(v.maxScrollDepth),
                    v.attentionDurationMs ? std::to_string(*v.attentionDurationMs) : ""});
  }
  return out;
}

std::string VisitsJson(std::span<const PageVisit> visits) {
  OrderedJson root = OrderedJson::array();
  for (const PageVisit& v : visits) {
    OrderedJson row;
    row["pageId"] = ToInt(v.pageId);
    row["tabId"] = ToInt(v.tabId);
    row["windowId"] = ToInt(v.windowId);
    row["url"] = v.url;
    row["httpReferrer"] = OptionalJson(v.httpReferrer);
    row["priorPageId"] = OptionalJson(v.priorPageId);
    row["transitionType"] = ToString(v.transitionType);
    row["transitionQualifier"] = OptionalJson(v.transitionQualifier);
    row["startTime"] = v.startTime;
    row["stopTime"] = v.stopTime;
    row["maxScrollDepth"] = v.maxScrollDepth;
    row["attentionDurationMs"] = OptionalJson(v.attentionDurationMs);
    root.push_back(std::move(row));
  }
  return root.dump(2) + "\n";
}

std::string ComparisonsCsv(std::span<const AttentionComparison> rows) {
  std::string out =
      CsvLine({"participantId", "pageId", "method", "a_ms", "e_pct", "d_pct", "ageGroup"});
  for (const AttentionComparison& r : rows) {
    out += CsvLine({r.participantId, std::to_string(ToInt(r.pageId)),
                    std::string(ToString(r.method)), std::to_string(r.a_ms),
                    OptionalNumber(r.e_pct), OptionalNumber(r.d_pct),
                    std::string(ToString(r.ageGroup))});
  }
  return out;
}

std::string ComparisonsJson(std::span<const AttentionComparison> rows) {
  OrderedJson root = OrderedJson::array();
  for (const AttentionComparison& r : rows) {
    OrderedJson row;
    row["participantId"] = r.participantId;
    row["pageId"] = ToInt(r.pageId);
    row["method"] = ToString(r.method);
    row["a_ms"] = r.a_ms;
    row["e_pct"] = OptionalJson(r.e_pct);
    row["d_pct"] = OptionalJson(r.d_pct);
    row["ageGroup"] = ToString(r.ageGroup);
    root.push_back(std::move(row));
  }
  return root.dump(2) + "\n";
}

std::string ReferrersCsv(std::span<const ReferrerRow> rows) {
  std::string out = CsvLine({"participantId", "pageId", "method", "referrer"});
  for (const ReferrerRow& r : rows) {
    out += CsvLine({r.participantId, std::to_string(ToInt(r.pageId)), r.method,
                    OptionalText(r.referrer)});
  }
  return out;
}

std::string ReferrersJson(std::span<const ReferrerRow> rows) {
  OrderedJson root = OrderedJson::array();
  for (const ReferrerRow& r : rows) {
    OrderedJson row;
    row["participantId"] = r.participantId;
    row["pageId"] = ToInt(r.pageId);
    row["method"] = r.method;
    row["referrer"] = OptionalJson(r.referrer);
    root.push_back(std::move(row));
  }
  return root.dump(2) + "\n";
}

std::string ThresholdCsv(const ErrorReport& report) {
  std::vector<std::string> header = {"method", "visits"};
  for (double t : report.thresholds)
    header.push_back("e_ge_" + FormatNumber(t));
  header.push_back("median_e_pct");
  std::string out = CsvLine(header);
  for (const MethodStats& m : report.methods) {
    std::vector<std::string> row = {std::string(ToString(m.method)),
                                    std::to_string(m.visits)};
    for (double p : m.proportionAtLeast)
      row.push_back(FormatNumber(p));
    row.push_back(OptionalNumber(m.medianError));
    out += CsvLine(row);
  }
  out += CsvLine({"zero_baseline_visits", std::to_string(report.zeroBaselineVisits)});
  return out;
}

std::string AgeMediansCsv(const ErrorReport& report) {
  std::vector<std::string> header = {"ageGroup"};
  for (const MethodStats& m : report.methods)
    header.emplace_back(ToString(m.method));
  std::string out = CsvLine(header);
  for (AgeGroup age : kAllAgeGroups) {
    std::vector<std::string> row = {std::string(ToString(age))};
    for (const MethodStats& m : report.methods) {
      auto it = m.medianErrorByAge.find(age);
      row.push_back(it == m.medianErrorByAge.end() ? "" : FormatNumber(it->second));
    }
    out += CsvLine(row);
  }
  return out;
}

std::string HistogramCsv(const ErrorReport& report) {
  std::vector<std::string> header = {"bin"};
  for (const MethodStats& m : report.methods)
    header.emplace_back(ToString(m.method));
  std::string out = CsvLine(header);
  for (int bin = 0; bin < kHistogramBins; ++bin) {
    std::vector<std::string> row = {HistogramBinLabel(bin)};
    for (const MethodStats& m : report.methods)
      row.push_back(std::to_string(m.histogram[static_cast<size_t>(bin)]));
    out += CsvLine(row);
  }
  return out;
}

std::string HistogramDat(const ErrorReport& report) {
  std::ostringstream out;
  out << "# index bin";
  for (const MethodStats& m : report.methods)
    out << ' ' << ToString(m.method);
  out << '\n';
  for (int bin = 0; bin < kHistogramBins; ++bin) {
    out << bin << " \"" << HistogramBinLabel(bin) << '"';
    for (const MethodStats& m : report.methods)
      out << ' ' << m.histogram[static_cast<size_t>(bin)];
    out << '\n';
  }
  return out.str();
}

std::string ReferrerComparisonCsv(
    const std::map<ReferrerMethod, ComparisonCounts>& counts) {
  std::string out = CsvLine({"method", "neither", "onlyOther", "onlyWebScience",
                             "fullMatch", "partialOrNoMatch", "partial", "noMatch",
                             "total"});
  for (const auto& [method, c] : counts) {
    out += CsvLine({std::string(ToString(method)), std::to_string(c.neither),
                    std::to_string(c.onlyOther), std::to_string(c.onlyWebScience),
                    std::to_string(c.fullMatch), std::to_string(c.partialOrNoMatch),
                    std::to_string(c.partial), std::to_string(c.noMatch),
                    std::to_string(c.Total())});
  }
  return out;
}

std::string MatrixCsv(const CategoryMatrix& matrix) {
  const std::vector<std::string> labels = CategoryLabels();
  std::vector<std::string> header = {"source"};
  header.insert(header.end(), labels.begin(), labels.end());
  std::string out = CsvLine(header);
  for (const std::string& row_label : labels) {
    std::vector<std::string> row = {row_label};
    auto row_it = matrix.find(row_label);
    for (const std::string& column : labels) {
      double value = 0;
      if (row_it != matrix.end()) {
        auto cell = row_it->second.find(column);
        if (cell != row_it->second.end())
          value = cell->second;
      }
      row.push_back(FormatNumber(value));
    }
    out += CsvLine(row);
  }
  return out;
}

CategoryMatrix ParseMatrixCsv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line))
    throw ReportParseError("empty matrix");
  const std::vector<std::string> header = SplitCsvLine(line);
  if (header.size() < 2 || header[0] != "source")
    throw ReportParseError("matrix header must start with 'source'");
  CategoryMatrix matrix;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const std::vector<std::string> row = SplitCsvLine(line);
    if (row.size() != header.size())
      throw ReportParseError("ragged matrix row '" + row[0] + "'");
    for (size_t i = 1; i < row.size(); ++i) {
      double value = 0;
      const char* first = row[i].data();
      const char* last = first + row[i].size();
      auto [end, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || end != last)
        throw ReportParseError("bad number '" + row[i] + "'");
      matrix[row[0]][header[i]] = value;
    }
  }
  return matrix;
}

std::string CountsCsv(std::string_view keyHeader,
                      const std::map<std::string, std::int64_t>& counts) {
  std::string out = CsvLine({std::string(keyHeader), "count"});
  for (const auto& [key, count] : counts)
    out += CsvLine({key, std::to_string(count)});
  return out;
}

}  // namespace webmeter
