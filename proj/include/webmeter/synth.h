#ifndef WEBMETER_SYNTH_H_
#define WEBMETER_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webmeter/exposure.h"
#include "webmeter/trace.h"

namespace webmeter {

// Behavioural knobs for synthetic sessions. Rates count events per minute of
// user activity; idle time carries no actions.
struct Persona {
  AgeGroup ageGroup = AgeGroup::kUnknown;
  double meanTabs = 1;
  double tabSwitchRatePerMin = 0;
  double idleFraction = 0;
  double sessionMinutes = 60;
  double linkClickRatePerMin = 2;
  double newTabProbability = 0;
  double referrerTrimProbability = 0;
  bool operator==(const Persona&) const = default;
};

class BadPersona : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BadMix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void ValidatePersona(const Persona& persona);

// Name written to the "generator" header field of synthesized traces.
inline constexpr std::string_view kGeneratorAlgorithm = "mt19937_64+splitmix64/v1";

// Same (persona, seed, participantId) gives byte-identical serialized traces.
Trace GenerateSession(const Persona& persona, std::uint64_t seed,
                      std::string participantId = "p00000");

struct WeightedPersona {
  Persona persona;
  double weight = 0;
};

// Throws BadMix unless weights are non-negative and sum to 1.
void ValidateMix(const std::vector<WeightedPersona>& mix);

// Per-trace seeds derive from (seed, index); participant ids are p00000,
// p00001, ... in index order.
std::vector<Trace> GeneratePanel(const std::vector<WeightedPersona>& mix, int n,
                                 std::uint64_t seed);
// Member |index| of that panel, generated on its own.
Trace GeneratePanelMember(const std::vector<WeightedPersona>& mix, int index,
                          std::uint64_t seed);

// splitmix64 of |seed| combined with |index|.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

// One persona per age bucket, from the heaviest multi-tab users (19-24) to
// the lightest (65+).
std::vector<Persona> DefaultPersonas();
std::vector<WeightedPersona> UniformMix(const std::vector<Persona>& personas);

// Single tab, no switching, no idling, full referrers.
Persona LinearPersona(double sessionMinutes = 60);

// The fictional domain universe synthesized traces browse.
DomainLists DefaultDomainLists();
// Hosts that appear in synthesized traces but on no list.
std::vector<std::string> UntrackedDomains();

// JSON array of persona objects, each optionally carrying a "weight".
std::vector<WeightedPersona> ParsePersonas(std::string_view json);
std::vector<WeightedPersona> LoadPersonas(const std::filesystem::path& path);
std::string SerializePersonas(const std::vector<WeightedPersona>& mix);

}  // namespace webmeter

#endif  // WEBMETER_SYNTH_H_
