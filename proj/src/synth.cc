#include "webmeter/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "webmeter/url.h"

namespace webmeter {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Traces are laid out for the default idle threshold of the measurement side.
constexpr Millis kIdleThresholdMs = 15000;
constexpr Millis kMinuteMs = 60000;
// Mean stretch of activity between two idle pauses.
constexpr Millis kPauseCycleMs = 150000;
constexpr Millis kMinInputGapMs = 1000;
constexpr Millis kMaxInputGapMs = 8000;
constexpr WindowId kWindow{1};

constexpr double kHistoryUpdatesPerMin = 0.1;
constexpr double kExposuresPerMin = 3;
constexpr double kSharesPerMin = 0.5;
constexpr double kScrollsPerMin = 4;
constexpr double kClockChangesPerMin = 1.0 / 30;
constexpr double kUnfocusWhileIdleProbability = 0.3;
constexpr double kSameHostProbability = 0.35;
constexpr double kUntrackedProbability = 0.3;

struct ListedDomain {
  DomainCategory category;
  std::string_view domain;
  double weight;
};

// Category weights are spread evenly over the domains of each category.
constexpr ListedDomain kListedDomains[] = {
    {DomainCategory::kNews, "heraldpost.example", 0.09},
    {DomainCategory::kNews, "morningwire.example", 0.08},
    {DomainCategory::kNews, "citygazette.example", 0.08},
    {DomainCategory::kHealth, "wellnessdaily.example", 0.05},
    {DomainCategory::kHealth, "clinicnotes.example", 0.05},
    {DomainCategory::kMisinfo, "truthleaks.example", 0.03},
    {DomainCategory::kMisinfo, "hiddenfacts.example", 0.02},
    {DomainCategory::kAggregator, "linkhub.example", 0.05},
    {DomainCategory::kAggregator, "newsdigest.example", 0.05},
    {DomainCategory::kFactcheck, "factfinder.example", 0.05},
    {DomainCategory::kPortal, "startportal.example", 0.1},
    {DomainCategory::kSearch, "findit.example", 0.1},
    {DomainCategory::kSocial, "friendbook.example", 0.06},
    {DomainCategory::kSocial, "chirper.example", 0.05},
    {DomainCategory::kSocial, "threadit.example", 0.04},
    {DomainCategory::kWebmail, "postbox.example", 0.1},
};

constexpr int kUntrackedDomainCount = 20;
constexpr std::string_view kPathSections[] = {"story", "item", "post", "watch", "page"};

std::string UntrackedDomain(int i) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "zq-offlist-%02d.test", i);
  return buffer;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // 53 random bits in [0, 1); identical on every platform.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  Millis UniformMs(Millis lo, Millis hi) {
    return lo + static_cast<Millis>(Uniform() * static_cast<double>(hi - lo + 1));
  }
  size_t Below(size_t n) {
    return std::min(n - 1, static_cast<size_t>(Uniform() * static_cast<double>(n)));
  }
  bool Chance(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// Bernoulli draws whose hit count never strays more than one from p * trials,
// so short sessions still honour persona probabilities.
class StratifiedCoin {
 public:
  explicit StratifiedCoin(double p) : p_(p) {}

  bool Flip(Rng& rng) {
    ++trials_;
    const bool heads = p_ * static_cast<double>(trials_) - static_cast<double>(hits_) >
                       rng.Uniform();
    hits_ += heads;
    return heads;
  }

 private:
  double p_;
  std::int64_t trials_ = 0;
  std::int64_t hits_ = 0;
};

// Activity is generated on an "active clock" that only runs while the user
// is active; idle pauses are spliced in afterwards. A pause at active time
// |at| means: last input at |at|, the threshold tail of activity, then |idle|
// milliseconds without input.
class ActivityLayout {
 public:
  struct Pause {
    Millis at = 0;
    Millis idle = 0;
  };

  ActivityLayout(double idleFraction, Millis sessionMs, Rng& rng) {
    if (idleFraction <= 0)
      return;
    if (idleFraction >= 1) {
      Add({0, sessionMs});
      return;
    }
    const double ratio = idleFraction / (1 - idleFraction);
    Millis resume = 0;
    Millis idle = 0;
    while (true) {
      const Millis at = resume + std::llround(kPauseCycleMs * rng.Uniform(0.5, 1.5));
      if (at + idle >= sessionMs)
        break;
      // Aim the cumulative idle time at the target ratio; the jitter keeps
      // pauses uneven without letting the error accumulate.
      const double target = ratio * static_cast<double>(at + kIdleThresholdMs);
      const double jitter = ratio * kPauseCycleMs * rng.Uniform(-0.25, 0.25);
      const Millis pause =
          std::max<Millis>(0, std::llround(target - static_cast<double>(idle) + jitter));
      Add({at, pause});
      idle += pause;
      resume = at + kIdleThresholdMs;
    }
  }

  const std::vector<Pause>& pauses() const { return pauses_; }

  // Wall-clock time of active instant |m|. Instants inside a threshold tail
  // slide to the end of that pause.
  Millis Wall(Millis m) const {
    auto it = std::lower_bound(pauses_.begin(), pauses_.end(), m,
                               [](const Pause& p, Millis v) { return p.at < v; });
    const size_t k = static_cast<size_t>(it - pauses_.begin());
    if (k == 0)
      return m;
    const Pause& last = pauses_[k - 1];
    if (m < last.at + kIdleThresholdMs)
      m = last.at + kIdleThresholdMs;
    return m + idle_through_[k - 1];
  }

 private:
  void Add(Pause pause) {
    const Millis before = idle_through_.empty() ? 0 : idle_through_.back();
    pauses_.push_back(pause);
    idle_through_.push_back(before + pause.idle);
  }

  std::vector<Pause> pauses_;
  std::vector<Millis> idle_through_;
};

enum class Action {
  kRefocus,
  kInput,
  kClick,
  kSwitch,
  kHistoryUpdate,
  kShare,
  kScroll,
  kLinkVisible,
  kLinkHidden,
  kClockChange,
  kUnfocus,
};

struct Occurrence {
  Millis wall = 0;
  Action action = Action::kInput;
  std::uint64_t seq = 0;
  // Pairs a kLinkHidden with its kLinkVisible.
  std::uint64_t span = 0;
};

struct OpenTab {
  TabId id{};
  std::string url;
  std::uint64_t epoch = 0;
  int depth = 0;
};

struct PendingSpan {
  TabId tab{};
  std::uint64_t epoch = 0;
  std::string url;
};

class SessionBuilder {
 public:
  SessionBuilder(const Persona& persona, std::uint64_t seed)
      : persona_(persona),
        rng_(seed),
        session_ms_(std::llround(persona.sessionMinutes * kMinuteMs)),
        new_tab_coin_(persona.newTabProbability),
        trim_coin_(persona.referrerTrimProbability) {}

  std::vector<TraceEvent> Build() {
    ActivityLayout layout(persona_.idleFraction, session_ms_, rng_);
    std::vector<Occurrence> plan = Plan(layout);

    const Millis clock_base = 1600000000000 + static_cast<Millis>(rng_.Below(100000000)) * 1000;
    Emit(0, BrowserStartup{clock_base});
    Emit(0, TabOpened{TabId{1}, kWindow});
    Emit(0, TabActivated{kWindow, TabId{1}});
    Emit(0, WindowFocusChanged{kWindow});
    Emit(0, InputActivity{});
    const std::string first = Homepage();
    Emit(0, AddressBarEntry{TabId{1}, first});
    Emit(0, PageLoad{TabId{1}, kWindow, first, std::nullopt});
    tabs_.push_back({TabId{1}, first, NextEpoch(), 0});
    visited_.push_back(first);

    for (const Occurrence& o : plan)
      Apply(o);
    Emit(session_ms_, BrowserShutdown{});
    return std::move(events_);
  }

 private:
  std::vector<Occurrence> Plan(const ActivityLayout& layout) {
    std::vector<Occurrence> plan;
    std::uint64_t seq = 0;
    auto add = [&](Millis wall, Action action, std::uint64_t span = 0) {
      if (wall < session_ms_)
        plan.push_back({wall, action, seq++, span});
    };

    // Inputs: dense within each active stretch, one exactly at each pause
    // point and one at each resumption.
    const auto& pauses = layout.pauses();
    for (size_t k = 0; k <= pauses.size(); ++k) {
      const Millis begin = k == 0 ? 0 : pauses[k - 1].at + kIdleThresholdMs;
      const Millis end = k < pauses.size() ? pauses[k].at
                                           : std::numeric_limits<Millis>::max();
      if (layout.Wall(begin) >= session_ms_)
        break;
      if (k > 0) {
        add(layout.Wall(begin), Action::kInput);
        if (pauses[k - 1].idle > 2000 && rng_.Chance(kUnfocusWhileIdleProbability)) {
          const Millis idle_start = layout.Wall(pauses[k - 1].at) + kIdleThresholdMs;
          add(idle_start + rng_.UniformMs(0, pauses[k - 1].idle / 5), Action::kUnfocus);
          add(layout.Wall(begin), Action::kRefocus);
        }
      }
      Millis m = begin;
      while (true) {
        m += rng_.UniformMs(kMinInputGapMs, kMaxInputGapMs);
        if (m >= end || layout.Wall(m) >= session_ms_)
          break;
        add(layout.Wall(m), Action::kInput);
      }
      if (k < pauses.size())
        add(layout.Wall(end), Action::kInput);
    }

    // Jittered grids keep realized rates close to the nominal ones.
    auto grid = [&](double per_minute, Action action) {
      if (per_minute <= 0)
        return;
      const double mean = kMinuteMs / per_minute;
      double m = 0;
      while (true) {
        m += mean * rng_.Uniform(0.5, 1.5);
        const Millis wall = layout.Wall(std::llround(m));
        if (wall >= session_ms_)
          break;
        add(wall, action);
      }
    };
    grid(persona_.linkClickRatePerMin, Action::kClick);
    grid(persona_.tabSwitchRatePerMin, Action::kSwitch);
    grid(kHistoryUpdatesPerMin, Action::kHistoryUpdate);
    grid(kSharesPerMin, Action::kShare);
    grid(kScrollsPerMin, Action::kScroll);
    grid(kClockChangesPerMin, Action::kClockChange);

    // Exposure spans that would straddle a pause are dropped.
    const double mean = kMinuteMs / kExposuresPerMin;
    double m = 0;
    std::uint64_t span = 0;
    while (true) {
      m += mean * rng_.Uniform(0.5, 1.5);
      const Millis start = std::llround(m);
      const Millis length = rng_.UniformMs(300, 5000);
      const Millis wall = layout.Wall(start);
      if (wall >= session_ms_)
        break;
      if (layout.Wall(start + length) - wall != length || wall + length >= session_ms_)
        continue;
      ++span;
      add(wall, Action::kLinkVisible, span);
      add(wall + length, Action::kLinkHidden, span);
    }

    std::sort(plan.begin(), plan.end(), [](const Occurrence& a, const Occurrence& b) {
      if (a.wall != b.wall)
        return a.wall < b.wall;
      if (a.action != b.action)
        return a.action < b.action;
      return a.seq < b.seq;
    });
    return plan;
  }

  void Apply(const Occurrence& o) {
    const Millis t = o.wall;
    switch (o.action) {
      case Action::kRefocus:
        if (!focused_) {
          Emit(t, WindowFocusChanged{kWindow});
          focused_ = true;
        }
        break;
      case Action::kUnfocus:
        if (focused_) {
          Emit(t, WindowFocusChanged{std::nullopt});
          focused_ = false;
        }
        break;
      case Action::kInput:
        Emit(t, InputActivity{});
        break;
      case Action::kClick:
        Emit(t, InputActivity{});
        Click(t);
        break;
      case Action::kSwitch:
        Emit(t, InputActivity{});
        Switch(t);
        break;
      case Action::kHistoryUpdate: {
        Emit(t, InputActivity{});
        OpenTab& tab = Current();
        const std::string next = PageOn(HostOf(tab.url));
        Emit(t, HistoryStateUpdate{tab.id, next});
        Navigated(tab, next);
        break;
      }
      case Action::kShare:
        Share(t);
        break;
      case Action::kScroll: {
        OpenTab& tab = Current();
        tab.depth = std::min<int>(100, tab.depth + static_cast<int>(rng_.Below(26)));
        Emit(t, ScrollPosition{tab.id, tab.depth});
        break;
      }
      case Action::kLinkVisible: {
        const OpenTab& tab = Current();
        PendingSpan pending{tab.id, tab.epoch, RandomPage()};
        const auto area = static_cast<std::int64_t>(rng_.UniformMs(400, 40000));
        Emit(t, LinkVisible{pending.tab, pending.url, area});
        spans_[o.span] = std::move(pending);
        break;
      }
      case Action::kLinkHidden: {
        auto it = spans_.find(o.span);
        if (it == spans_.end())
          break;
        const PendingSpan& pending = it->second;
        auto tab = std::find_if(tabs_.begin(), tabs_.end(),
                                [&](const OpenTab& x) { return x.id == pending.tab; });
        if (tab != tabs_.end() && tab->epoch == pending.epoch)
          Emit(t, LinkHidden{pending.tab, pending.url});
        spans_.erase(it);
        break;
      }
      case Action::kClockChange: {
        const Millis magnitude = rng_.UniformMs(kMinuteMs, 180 * kMinuteMs);
        Emit(t, SystemClockChange{rng_.Chance(0.5) ? magnitude : -magnitude});
        break;
      }
    }
  }

  void Click(Millis t) {
    OpenTab& source = Current();
    const std::string source_url = source.url;
    const TabId source_id = source.id;
    const std::string target = LinkTarget(source_url);
    const std::string referrer =
        trim_coin_.Flip(rng_) ? OriginOf(source_url) : source_url;
    if (new_tab_coin_.Flip(rng_)) {
      const TabId id = NextTabId();
      Emit(t, LinkClick{source_id, target, Disposition::kNewTab});
      Emit(t, TabOpened{id, kWindow});
      Emit(t, PageLoad{id, kWindow, target, referrer});
      tabs_.push_back({id, target, NextEpoch(), 0});
      TrimTabs(t);
    } else {
      Emit(t, LinkClick{source_id, target, Disposition::kSameTab});
      Emit(t, PageLoad{source_id, kWindow, target, referrer});
      Navigated(source, target);
    }
    visited_.push_back(target);
  }

  void Switch(Millis t) {
    // Below the persona's usual tab count the user opens a fresh tab instead.
    const double wanted = persona_.meanTabs + rng_.Uniform(-0.5, 0.5);
    if (tabs_.size() < 2 || static_cast<double>(tabs_.size()) + 1 <= wanted) {
      const TabId id = NextTabId();
      const std::string url = Homepage();
      Emit(t, TabOpened{id, kWindow});
      Emit(t, TabActivated{kWindow, id});
      Emit(t, AddressBarEntry{id, url});
      Emit(t, PageLoad{id, kWindow, url, std::nullopt});
      tabs_.push_back({id, url, NextEpoch(), 0});
      current_ = tabs_.size() - 1;
      visited_.push_back(url);
      return;
    }
    size_t next = rng_.Below(tabs_.size() - 1);
    if (next >= current_)
      ++next;
    current_ = next;
    Emit(t, TabActivated{kWindow, tabs_[current_].id});
  }

  // Closes the oldest background tab while more tabs are open than the
  // persona keeps around.
  void TrimTabs(Millis t) {
    const double limit = persona_.meanTabs + rng_.Uniform(-0.5, 0.5);
    while (tabs_.size() > 1 && static_cast<double>(tabs_.size()) > limit) {
      const size_t victim = current_ == 0 ? 1 : 0;
      Emit(t, TabClosed{tabs_[victim].id});
      tabs_.erase(tabs_.begin() + static_cast<std::ptrdiff_t>(victim));
      if (victim < current_)
        --current_;
    }
  }

  void Share(Millis t) {
    const std::string host = HostOf(Current().url);
    const auto platform = SocialPlatformOf(host);
    if (!platform)
      return;
    Emit(t, InputActivity{});
    static constexpr ShareAction kActions[] = {ShareAction::kPost, ShareAction::kReshare,
                                               ShareAction::kFavorite, ShareAction::kComment,
                                               ShareAction::kVote};
    static constexpr Audience kAudiences[] = {Audience::kPublic, Audience::kRestricted,
                                              Audience::kUnknown};
    SocialShare share;
    share.platform = *platform;
    share.action = kActions[rng_.Below(std::size(kActions))];
    share.audience = kAudiences[rng_.Below(std::size(kAudiences))];
    share.reshare = share.action == ShareAction::kReshare;
    const bool carries_link = share.action != ShareAction::kFavorite &&
                              share.action != ShareAction::kVote;
    if (carries_link) {
      share.url = rng_.Chance(0.5) ? visited_[rng_.Below(visited_.size())] : RandomPage();
    }
    Emit(t, std::move(share));
  }

  std::optional<SharePlatform> SocialPlatformOf(std::string_view host) const {
    if (HostWithinDomain(host, "friendbook.example"))
      return SharePlatform::kFacebook;
    if (HostWithinDomain(host, "chirper.example"))
      return SharePlatform::kTwitter;
    if (HostWithinDomain(host, "threadit.example"))
      return SharePlatform::kReddit;
    return std::nullopt;
  }

  void Navigated(OpenTab& tab, const std::string& url) {
    tab.url = url;
    tab.epoch = NextEpoch();
    tab.depth = 0;
  }

  std::string LinkTarget(const std::string& source) {
    if (rng_.Chance(kSameHostProbability))
      return PageOn(HostOf(source));
    return RandomPage();
  }

  std::string RandomHost() {
    if (rng_.Chance(kUntrackedProbability))
      return "www." + UntrackedDomain(static_cast<int>(rng_.Below(kUntrackedDomainCount)));
    double total = 0;
    for (const ListedDomain& d : kListedDomains)
      total += d.weight;
    double pick = rng_.Uniform() * total;
    const ListedDomain* chosen = &kListedDomains[0];
    for (const ListedDomain& d : kListedDomains) {
      chosen = &d;
      if (pick < d.weight)
        break;
      pick -= d.weight;
    }
    static constexpr std::string_view kPrefixes[] = {"", "www.", "www.", "m."};
    return std::string(kPrefixes[rng_.Below(std::size(kPrefixes))]) +
           std::string(chosen->domain);
  }

  std::string RandomPage() { return PageOn(RandomHost()); }

  std::string Homepage() { return "https://" + RandomHost() + "/"; }

  std::string PageOn(const std::string& host) {
    std::string url = "https://" + host;
    if (rng_.Chance(0.1))
      return url + "/";
    url += "/";
    url += kPathSections[rng_.Below(std::size(kPathSections))];
    url += "/" + std::to_string(rng_.Below(1000));
    if (rng_.Chance(0.1))
      url += "?utm_source=feed";
    return url;
  }

  static std::string HostOf(const std::string& url) { return ParseUrl(url).host; }

  OpenTab& Current() { return tabs_[current_]; }
  TabId NextTabId() { return TabId{next_tab_++}; }
  std::uint64_t NextEpoch() { return ++epoch_; }

  template <typename Kind>
  void Emit(Millis t, Kind&& kind) {
    events_.push_back(TraceEvent{t, EventKind(std::forward<Kind>(kind))});
  }

  const Persona& persona_;
  Rng rng_;
  Millis session_ms_;
  StratifiedCoin new_tab_coin_;
  StratifiedCoin trim_coin_;

  std::vector<TraceEvent> events_;
  std::vector<OpenTab> tabs_;
  size_t current_ = 0;
  std::int64_t next_tab_ = 2;
  std::uint64_t epoch_ = 0;
  bool focused_ = true;
  std::vector<std::string> visited_;
  std::map<std::uint64_t, PendingSpan> spans_;
};

bool InUnitRange(double v) { return v >= 0 && v <= 1; }

void RequireField(const Json& object, const char* key) {
  if (!object.contains(key) || !object[key].is_number())
    throw BadPersona(std::string("persona field ") + key + " must be a number");
}

}  // namespace

void ValidatePersona(const Persona& p) {
  const double values[] = {p.meanTabs,       p.tabSwitchRatePerMin, p.idleFraction,
                           p.sessionMinutes, p.linkClickRatePerMin, p.newTabProbability,
                           p.referrerTrimProbability};
  for (double v : values) {
    if (!std::isfinite(v))
      throw BadPersona("persona values must be finite");
  }
  if (p.meanTabs < 1)
    throw BadPersona("meanTabs must be at least 1");
  if (p.tabSwitchRatePerMin < 0 || p.linkClickRatePerMin < 0)
    throw BadPersona("rates must be non-negative");
  if (!InUnitRange(p.idleFraction))
    throw BadPersona("idleFraction must lie in [0, 1]");
  if (!InUnitRange(p.newTabProbability))
    throw BadPersona("newTabProbability must lie in [0, 1]");
  if (!InUnitRange(p.referrerTrimProbability))
    throw BadPersona("referrerTrimProbability must lie in [0, 1]");
  // A week of browsing is far past any realistic session.
  if (p.sessionMinutes <= 0 || p.sessionMinutes > 7 * 24 * 60)
    throw BadPersona("sessionMinutes must lie in (0, 10080]");
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trace GenerateSession(const Persona& persona, std::uint64_t seed,
                      std::string participantId) {
  ValidatePersona(persona);
  Trace trace;
  trace.participantId = std::move(participantId);
  trace.ageGroup = persona.ageGroup;
  trace.generator = std::string(kGeneratorAlgorithm) + " seed=" + std::to_string(seed);
  trace.events = SessionBuilder(persona, seed).Build();
  return trace;
}

void ValidateMix(const std::vector<WeightedPersona>& mix) {
  if (mix.empty())
    throw BadMix("persona mix is empty");
  double total = 0;
  for (const WeightedPersona& w : mix) {
    if (!std::isfinite(w.weight) || w.weight < 0)
      throw BadMix("weights must be finite and non-negative");
    ValidatePersona(w.persona);
    total += w.weight;
  }
  if (std::abs(total - 1) > 1e-9)
    throw BadMix("weights must sum to 1");
}

Trace GeneratePanelMember(const std::vector<WeightedPersona>& mix, int index,
                          std::uint64_t seed) {
  const auto i = static_cast<std::uint64_t>(index);
  Rng picker(DeriveSeed(seed, 2 * i));
  double u = picker.Uniform();
  size_t chosen = mix.size() - 1;
  for (size_t j = 0; j < mix.size(); ++j) {
    if (u < mix[j].weight) {
      chosen = j;
      break;
    }
    u -= mix[j].weight;
  }
  char id[16];
  std::snprintf(id, sizeof id, "p%05d", index);
  return GenerateSession(mix[chosen].persona, DeriveSeed(seed, 2 * i + 1), id);
}

std::vector<Trace> GeneratePanel(const std::vector<WeightedPersona>& mix, int n,
                                 std::uint64_t seed) {
  ValidateMix(mix);
  if (n < 0)
    throw BadMix("panel size must be non-negative");
  std::vector<Trace> panel;
  panel.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    panel.push_back(GeneratePanelMember(mix, i, seed));
  return panel;
}

std::vector<Persona> DefaultPersonas() {
  std::vector<Persona> personas;
  const double switch_rates[] = {6, 5, 4, 3, 2, 1};
  const double mean_tabs[] = {6, 5, 4, 3, 2.5, 2};
  const double new_tab[] = {0.4, 0.35, 0.3, 0.25, 0.2, 0.15};
  for (size_t i = 0; i < std::size(kAllAgeGroups); ++i) {
    Persona p;
    p.ageGroup = kAllAgeGroups[i];
    p.meanTabs = mean_tabs[i];
    p.tabSwitchRatePerMin = switch_rates[i];
    p.idleFraction = 0.2;
    p.sessionMinutes = 60;
    p.linkClickRatePerMin = 4;
    p.newTabProbability = new_tab[i];
    p.referrerTrimProbability = 0.15;
    personas.push_back(p);
  }
  return personas;
}

std::vector<WeightedPersona> UniformMix(const std::vector<Persona>& personas) {
  std::vector<WeightedPersona> mix;
  for (const Persona& p : personas)
    mix.push_back({p, 1.0 / static_cast<double>(personas.size())});
  return mix;
}

Persona LinearPersona(double sessionMinutes) {
  Persona p;
  p.ageGroup = AgeGroup::kUnknown;
  p.meanTabs = 1;
  p.tabSwitchRatePerMin = 0;
  p.idleFraction = 0;
  p.sessionMinutes = sessionMinutes;
  p.linkClickRatePerMin = 2;
  p.newTabProbability = 0;
  p.referrerTrimProbability = 0;
  return p;
}

DomainLists DefaultDomainLists() {
  DomainLists lists;
  for (const ListedDomain& d : kListedDomains)
    lists.Add(d.category, d.domain);
  return lists;
}

std::vector<std::string> UntrackedDomains() {
  std::vector<std::string> domains;
  for (int i = 0; i < kUntrackedDomainCount; ++i)
    domains.push_back(UntrackedDomain(i));
  return domains;
}

std::vector<WeightedPersona> ParsePersonas(std::string_view text) {
  Json root = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!root.is_array())
    throw BadPersona("persona file must hold a JSON array");
  static const std::set<std::string> kKeys = {
      "ageGroup",           "meanTabs",          "tabSwitchRatePerMin",
      "idleFraction",       "sessionMinutes",    "linkClickRatePerMin",
      "newTabProbability",  "referrerTrimProbability", "weight"};
  std::vector<WeightedPersona> mix;
  size_t weighted = 0;
  for (const Json& entry : root) {
    if (!entry.is_object())
      throw BadPersona("persona entries must be objects");
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      if (!kKeys.count(it.key()))
        throw BadPersona("unknown persona field '" + it.key() + "'");
    }
    if (!entry.contains("ageGroup") || !entry["ageGroup"].is_string())
      throw BadPersona("persona field ageGroup must be a string");
    auto age = ParseAgeGroup(entry["ageGroup"].get<std::string>());
    if (!age)
      throw BadPersona("unknown ageGroup " + entry["ageGroup"].get<std::string>());
    for (const char* key : {"meanTabs", "tabSwitchRatePerMin", "idleFraction",
                            "sessionMinutes", "linkClickRatePerMin", "newTabProbability",
                            "referrerTrimProbability"}) {
      RequireField(entry, key);
    }
    WeightedPersona w;
    w.persona.ageGroup = *age;
    w.persona.meanTabs = entry["meanTabs"].get<double>();
    w.persona.tabSwitchRatePerMin = entry["tabSwitchRatePerMin"].get<double>();
    w.persona.idleFraction = entry["idleFraction"].get<double>();
    w.persona.sessionMinutes = entry["sessionMinutes"].get<double>();
    w.persona.linkClickRatePerMin = entry["linkClickRatePerMin"].get<double>();
    w.persona.newTabProbability = entry["newTabProbability"].get<double>();
    w.persona.referrerTrimProbability = entry["referrerTrimProbability"].get<double>();
    ValidatePersona(w.persona);
    if (entry.contains("weight")) {
      RequireField(entry, "weight");
      w.weight = entry["weight"].get<double>();
      ++weighted;
    }
    mix.push_back(w);
  }
  if (mix.empty())
    throw BadPersona("persona file lists no personas");
  if (weighted == 0) {
    for (WeightedPersona& w : mix)
      w.weight = 1.0 / static_cast<double>(mix.size());
  } else if (weighted != mix.size()) {
    throw BadMix("either every persona carries a weight or none does");
  }
  return mix;
}

std::vector<WeightedPersona> LoadPersonas(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw BadPersona("cannot read persona file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePersonas(buffer.str());
}

std::string SerializePersonas(const std::vector<WeightedPersona>& mix) {
  OrderedJson root = OrderedJson::array();
  for (const WeightedPersona& w : mix) {
    OrderedJson p;
    p["ageGroup"] = ToString(w.persona.ageGroup);
    p["meanTabs"] = w.persona.meanTabs;
    p["tabSwitchRatePerMin"] = w.persona.tabSwitchRatePerMin;
    p["idleFraction"] = w.persona.idleFraction;
    p["sessionMinutes"] = w.persona.sessionMinutes;
    p["linkClickRatePerMin"] = w.persona.linkClickRatePerMin;
    p["newTabProbability"] = w.persona.newTabProbability;
    p["referrerTrimProbability"] = w.persona.referrerTrimProbability;
    p["weight"] = w.weight;
    root.push_back(std::move(p));
  }
  return root.dump(2) + "\n";
}

}  // namespace webmeter
