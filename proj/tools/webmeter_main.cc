// webmeter: batch front-end over browsing-session traces.
//
//   webmeter generate --seed N --out DIR [--count N] [--personas FILE]
//   webmeter validate --traces PATH
//   webmeter measure  --traces PATH --out DIR [--scope FILE] [--format csv|json]
//   webmeter compare  --traces PATH --out DIR [--scope FILE]
//   webmeter aggregate --traces PATH --lists FILE --out DIR
//   webmeter digest   --traces PATH --lists FILE --schema FILE --store DIR
//   webmeter study    --traces PATH --lists FILE --out DIR
//   webmeter delete   --store DIR --pseudo-id ID
//   webmeter sweep    --store DIR --now MS
//
// Exit status: 0 success, 1 trace or digest violations, 2 bad configuration.

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panel.h"
#include "webmeter/synth.h"

namespace webmeter {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitConfig = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  fs::path traces;
  std::optional<fs::path> scope;
  std::optional<fs::path> lists;
  std::optional<fs::path> schema;
  std::optional<std::uint64_t> seed;
  fs::path out;
  std::string format = "csv";
  std::optional<int> workers;

  int count = 600;
  std::optional<fs::path> personas;
  Millis idleThresholdMs = kDefaultIdleThresholdMs;
  int windowDays = 7;
  fs::path store;
  std::string secret = "participant-secret";
  std::string keyId = "study-key-1";
  std::string pseudoId;
  Millis nowMs = 0;
};

std::vector<MatchPattern> Scope(const RunConfig& config) {
  if (!config.scope)
    return {ParsePattern("<all_urls>")};
  return LoadPatternList(*config.scope);
}

DomainLists Lists(const RunConfig& config) {
  DomainLists lists = LoadDomainLists(*config.lists);
  lists.Validate();
  return lists;
}

// Loads the panel; any invalid trace aborts with diagnostics on stderr.
std::optional<PanelLoad> LoadValidPanel(const RunConfig& config, int workers) {
  PanelLoad load = LoadPanel(config.traces, workers);
  if (load.traces.empty() && load.diagnostics.empty())
    throw ConfigError("no " + std::string(kTraceExtension) + " files under " +
                      config.traces.string());
  for (const std::string& d : load.diagnostics)
    std::cerr << d << '\n';
  if (!load.diagnostics.empty())
    return std::nullopt;
  return load;
}

std::vector<TraceMeasurement> MeasurePanel(const PanelLoad& load, const RunConfig& config,
                                           int workers) {
  const std::vector<MatchPattern> scope = Scope(config);
  AttentionOptions options;
  options.idleThresholdMs = config.idleThresholdMs;
  std::vector<TraceMeasurement> results(load.traces.size());
  ParallelFor(load.traces.size(), workers, [&](size_t i) {
    results[i] = MeasureTrace(load.traces[i].trace, scope, options);
  });
  return results;
}

int Generate(const RunConfig& config, int workers) {
  const std::vector<WeightedPersona> mix =
      config.personas ? LoadPersonas(*config.personas) : UniformMix(DefaultPersonas());
  ValidateMix(mix);
  if (config.count < 0)
    throw ConfigError("--count must be non-negative");
  const auto n = static_cast<size_t>(config.count);
  ParallelFor(n, workers, [&](size_t i) {
    Trace trace = GeneratePanelMember(mix, static_cast<int>(i), *config.seed);
    WriteFileText(config.out / (trace.participantId + std::string(kTraceExtension)),
                  SerializeTrace(trace));
  });
  WriteFileText(config.out / "personas.json", SerializePersonas(mix));
  WriteFileText(config.out / "domain-lists.csv", SerializeDomainLists(DefaultDomainLists()));
  std::cout << "generated " << n << " traces in " << config.out.string() << '\n';
  return kExitOk;
}

int Validate(const RunConfig& config, int workers) {
  const size_t files = TraceFiles(config.traces).size();
  if (files == 0)
    throw ConfigError("no " + std::string(kTraceExtension) + " files under " +
                      config.traces.string());
  PanelLoad load = LoadPanel(config.traces, workers);
  for (const std::string& d : load.diagnostics)
    std::cerr << d << '\n';
  std::cout << "checked " << files << " traces: " << files - load.traces.size()
            << " invalid, " << load.diagnostics.size() << " violations\n";
  return load.diagnostics.empty() ? kExitOk : kExitViolations;
}

int Measure(const RunConfig& config, int workers) {
  auto load = LoadValidPanel(config, workers);
  if (!load)
    return kExitViolations;
  std::set<std::string> seen;
  for (const LoadedTrace& t : load->traces) {
    if (!seen.insert(t.trace.participantId).second)
      throw ConfigError("participant " + t.trace.participantId + " appears in two traces");
  }
  const std::vector<TraceMeasurement> results = MeasurePanel(*load, config, workers);
  const bool json = config.format == "json";
  const std::string ext = json ? ".json" : ".csv";

  std::vector<AttentionComparison> comparisons;
  std::vector<ReferrerRow> referrers;
  size_t visits = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    const TraceMeasurement& m = results[i];
    const std::string& id = load->traces[i].trace.participantId;
    WriteFileText(config.out / "visits" / (id + ext),
                  json ? VisitsJson(m.visits) : VisitsCsv(m.visits));
    comparisons.insert(comparisons.end(), m.comparisons.rows.begin(),
                       m.comparisons.rows.end());
    referrers.insert(referrers.end(), m.referrers.begin(), m.referrers.end());
    visits += m.visits.size();
  }
  WriteFileText(config.out / ("attention" + ext),
                json ? ComparisonsJson(comparisons) : ComparisonsCsv(comparisons));
  WriteFileText(config.out / ("referrers" + ext),
                json ? ReferrersJson(referrers) : ReferrersCsv(referrers));
  std::cout << "measured " << results.size() << " traces, " << visits << " visits\n";
  return kExitOk;
}

int Compare(const RunConfig& config, int workers) {
  auto load = LoadValidPanel(config, workers);
  if (!load)
    return kExitViolations;
  const std::vector<TraceMeasurement> results = MeasurePanel(*load, config, workers);

  std::vector<AttentionComparison> rows;
  std::int64_t zero = 0;
  std::map<ReferrerMethod, ComparisonCounts> referrers;
  for (const TraceMeasurement& m : results) {
    rows.insert(rows.end(), m.comparisons.rows.begin(), m.comparisons.rows.end());
    zero += m.comparisons.zeroBaselineVisits;
    for (const auto& [method, counts] : m.referrerCounts)
      referrers[method] += counts;
  }
  const ErrorReport report = ErrorStats(rows, {1, 10, 25}, zero);
  WriteFileText(config.out / "error-thresholds.csv", ThresholdCsv(report));
  WriteFileText(config.out / "age-medians.csv", AgeMediansCsv(report));
  WriteFileText(config.out / "histograms.csv", HistogramCsv(report));
  WriteFileText(config.out / "histograms.dat", HistogramDat(report));
  WriteFileText(config.out / "referrer-comparison.csv", ReferrerComparisonCsv(referrers));
  std::cout << "compared " << results.size() << " traces, " << zero
            << " zero-attention visits excluded\n";
  return kExitOk;
}

// Per participant, window-keyed aggregates over all of their sessions.
std::map<std::string, WindowAggregates> PanelAggregates(const PanelLoad& load,
                                                        const RunConfig& config,
                                                        int workers) {
  const DomainLists lists = Lists(config);
  const std::vector<TraceMeasurement> results = MeasurePanel(load, config, workers);
  std::vector<WindowAggregates> sessions(results.size());
  const Millis window = config.windowDays * kDayMs;
  ParallelFor(results.size(), workers, [&](size_t i) {
    sessions[i] = SessionAggregates(load.traces[i].trace, results[i].visits, lists, window);
  });
  std::map<std::string, WindowAggregates> merged;
  for (size_t i = 0; i < sessions.size(); ++i)
    MergeAggregates(merged[load.traces[i].trace.participantId], sessions[i]);
  return merged;
}

std::string ValueText(const PayloadValue& value) {
  if (const auto* n = std::get_if<std::int64_t>(&value))
    return std::to_string(*n);
  return std::get<std::string>(value);
}

int Aggregate(const RunConfig& config, int workers) {
  auto load = LoadValidPanel(config, workers);
  if (!load)
    return kExitViolations;
  const Millis window = config.windowDays * kDayMs;
  std::string csv = CsvLine({"participantId", "windowStart", "windowEnd", "field", "value"});
  for (const auto& [id, windows] : PanelAggregates(*load, config, workers)) {
    for (const auto& [start, fields] : windows) {
      for (const auto& [name, value] : fields) {
        csv += CsvLine({id, std::to_string(start), std::to_string(start + window), name,
                        ValueText(value)});
      }
    }
  }
  WriteFileText(config.out / "aggregates.csv", csv);
  std::cout << "aggregated " << load->traces.size() << " traces\n";
  return kExitOk;
}

int Digests(const RunConfig& config, int workers) {
  const StudySchema schema = LoadSchema(*config.schema);
  auto load = LoadValidPanel(config, workers);
  if (!load)
    return kExitViolations;
  DigestStore store(config.store);
  const Millis window = config.windowDays * kDayMs;
  int written = 0;
  bool violations = false;
  for (const auto& [id, windows] : PanelAggregates(*load, config, workers)) {
    const std::string pseudo = PseudoId(schema.studyId, id + ":" + config.secret);
    for (const auto& [start, fields] : windows) {
      // Data minimization: only fields the schema declares leave the client.
      std::map<std::string, PayloadValue> payload;
      for (const auto& [name, value] : fields) {
        if (schema.Find(name))
          payload.emplace(name, value);
      }
      const Digest digest =
          BuildDigest(payload, schema, pseudo, Window{start, start + window}, config.keyId);
      const std::vector<DigestViolation> problems = ValidateDigest(digest, schema);
      for (const DigestViolation& v : problems)
        std::cerr << id << " window " << start << ": " << v.field << ": " << v.reason << '\n';
      if (!problems.empty()) {
        violations = true;
        continue;
      }
      store.Write(digest);
      ++written;
    }
  }
  std::cout << "wrote " << written << " digests to " << config.store.string() << '\n';
  return violations ? kExitViolations : kExitOk;
}

int Study(const RunConfig& config, int workers) {
  auto load = LoadValidPanel(config, workers);
  if (!load)
    return kExitViolations;
  const DomainLists lists = Lists(config);
  const std::vector<TraceMeasurement> results = MeasurePanel(*load, config, workers);
  std::vector<ExposureResult> exposures(results.size());
  std::vector<ShareResult> shares(results.size());
  ParallelFor(results.size(), workers, [&](size_t i) {
    exposures[i] = DetectExposures(load->traces[i].trace, lists);
    shares[i] = TrackShares(load->traces[i].trace, lists);
  });
  std::vector<PageVisit> visits;
  for (const TraceMeasurement& m : results)
    visits.insert(visits.end(), m.visits.begin(), m.visits.end());
  const StudySummary summary = SummarizeStudy(exposures, shares, visits, lists);
  WriteFileText(config.out / "users-exposed.csv", MatrixCsv(summary.usersExposed));
  WriteFileText(config.out / "exposure-share.csv", MatrixCsv(summary.exposureShare));
  WriteFileText(config.out / "visits-by-category.csv",
                CountsCsv("category", summary.visitsByCategory));
  WriteFileText(config.out / "shares-by-category.csv",
                CountsCsv("category", summary.sharesByCategory));
  std::cout << "summarized " << results.size() << " traces\n";
  return kExitOk;
}

int Delete(const RunConfig& config) {
  const std::int64_t removed = DigestStore(config.store).DeleteParticipant(config.pseudoId);
  std::cout << "removed " << removed << " digests\n";
  return kExitOk;
}

int Sweep(const RunConfig& config) {
  const std::int64_t removed = DigestStore(config.store).RetentionSweep(config.nowMs);
  std::cout << "removed " << removed << " digests\n";
  return kExitOk;
}

int Dispatch(const RunConfig& config) {
  const int workers = ResolveWorkers(config.workers);
  const std::string& s = config.subcommand;
  if (s == "generate")
    return Generate(config, workers);
  if (s == "validate")
    return Validate(config, workers);
  if (s == "measure")
    return Measure(config, workers);
  if (s == "compare")
    return Compare(config, workers);
  if (s == "aggregate")
    return Aggregate(config, workers);
  if (s == "digest")
    return Digests(config, workers);
  if (s == "study")
    return Study(config, workers);
  if (s == "delete")
    return Delete(config);
  if (s == "sweep")
    return Sweep(config);
  throw ConfigError("unknown subcommand " + s);
}

int Main(int argc, char** argv) {
  RunConfig config;
  CLI::App app{"Browser-session measurement engine"};
  app.require_subcommand(1);
  app.fallthrough();

  auto traces = [&](CLI::App* sub) {
    sub->add_option("--traces", config.traces, "Trace file or directory of *.trace files")
        ->required()
        ->check(CLI::ExistingPath);
  };
  auto out = [&](CLI::App* sub) {
    sub->add_option("--out", config.out, "Output directory")->required();
  };
  auto scope = [&](CLI::App* sub) {
    sub->add_option("--scope", config.scope, "Match-pattern file, one pattern per line")
        ->check(CLI::ExistingFile);
    sub->add_option("--idle-threshold", config.idleThresholdMs, "Idle threshold in ms")
        ->check(CLI::PositiveNumber);
  };
  auto lists = [&](CLI::App* sub) {
    sub->add_option("--lists", config.lists, "Domain-list CSV (category,domain)")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto window = [&](CLI::App* sub) {
    sub->add_option("--window-days", config.windowDays, "Aggregation window in days")
        ->check(CLI::PositiveNumber);
  };
  app.add_option("--workers", config.workers, "Worker threads (default: WEBMETER_WORKERS)")
      ->check(CLI::PositiveNumber);

  CLI::App* generate = app.add_subcommand("generate", "Synthesize a persona panel");
  generate->add_option("--seed", config.seed, "Panel seed")->required();
  out(generate);
  generate->add_option("--count", config.count, "Number of traces")->check(CLI::NonNegativeNumber);
  generate->add_option("--personas", config.personas, "Persona mix JSON")
      ->check(CLI::ExistingFile);

  CLI::App* validate = app.add_subcommand("validate", "Lint traces");
  traces(validate);

  CLI::App* measure = app.add_subcommand("measure", "Visits, attention and referrers");
  traces(measure);
  out(measure);
  scope(measure);
  measure->add_option("--format", config.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* compare = app.add_subcommand("compare", "Baseline comparison reports");
  traces(compare);
  out(compare);
  scope(compare);

  CLI::App* aggregate = app.add_subcommand("aggregate", "Per-window category counts");
  traces(aggregate);
  lists(aggregate);
  out(aggregate);
  scope(aggregate);
  window(aggregate);

  CLI::App* digest = app.add_subcommand("digest", "Build, validate and store digests");
  traces(digest);
  lists(digest);
  digest->add_option("--schema", config.schema, "Study schema JSON")
      ->required()
      ->check(CLI::ExistingFile);
  digest->add_option("--store", config.store, "Digest store root")->required();
  digest->add_option("--secret", config.secret, "Secret mixed into participant keys");
  digest->add_option("--key-id", config.keyId, "Study key identifier");
  scope(digest);
  window(digest);

  CLI::App* study = app.add_subcommand("study", "Exposure and sharing tables");
  traces(study);
  lists(study);
  out(study);
  scope(study);

  CLI::App* remove = app.add_subcommand("delete", "Remove a participant's digests");
  remove->add_option("--store", config.store, "Digest store root")
      ->required()
      ->check(CLI::ExistingDirectory);
  remove->add_option("--pseudo-id", config.pseudoId, "Pseudonymous participant id")
      ->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Drop digests past retention");
  sweep->add_option("--store", config.store, "Digest store root")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--now", config.nowMs, "Current time, ms since the epoch")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  config.subcommand = app.get_subcommands().front()->get_name();

  try {
    return Dispatch(config);
  } catch (const std::exception& e) {
    std::cerr << "webmeter " << config.subcommand << ": " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace
}  // namespace webmeter

int main(int argc, char** argv) { return webmeter::Main(argc, argv); }
