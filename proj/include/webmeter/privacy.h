#ifndef WEBMETER_PRIVACY_H_
#define WEBMETER_PRIVACY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "webmeter/ids.h"

namespace webmeter {

// Counts records per category label. The counts always sum to the number of
// records.
template <typename Record, typename CategoryFn>
std::map<std::string, std::int64_t> Aggregate(std::span<const Record> records,
                                              CategoryFn&& category_of) {
  std::map<std::string, std::int64_t> counts;
  for (const Record& record : records)
    ++counts[std::string(category_of(record))];
  return counts;
}

inline constexpr Millis kDayMs = 24LL * 60 * 60 * 1000;
inline constexpr Millis kDefaultAggregationWindowMs = 7 * kDayMs;
inline constexpr Millis kRawRetentionMs = 730 * kDayMs;

struct Window {
  Millis start = 0;
  Millis end = 0;
  bool operator==(const Window&) const = default;
};

// The epoch-aligned window of |lengthMs| containing |studyTimeMs|.
Window WindowContaining(Millis studyTimeMs, Millis lengthMs = kDefaultAggregationWindowMs);

class EmptyInput : public std::invalid_argument {
 public:
  EmptyInput() : std::invalid_argument("study id and participant secret must be non-empty") {}
};

// HMAC-SHA256 keyed by the participant secret over the study id, as 64 hex
// characters. Deterministic; the same secret yields unrelated ids in
// different studies.
std::string PseudoId(std::string_view studyId, std::string_view participantSecret);

enum class ValueType { kCount, kCategory, kTimestampBucket };
enum class RiskLabel { kLow, kMedium, kHigh };

std::string_view ToString(ValueType type);
std::string_view ToString(RiskLabel label);

struct SchemaField {
  std::string name;
  ValueType valueType = ValueType::kCount;
  RiskLabel riskLabel = RiskLabel::kLow;
  bool operator==(const SchemaField&) const = default;
};

struct StudySchema {
  std::string studyId;
  std::vector<SchemaField> fields;

  const SchemaField* Find(std::string_view name) const;
  bool operator==(const StudySchema&) const = default;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON: {"studyId": ..., "fields": [{"name", "valueType", "riskLabel"}]}.
// Field names must be unique and every field must carry a risk label.
StudySchema ParseSchema(std::string_view json);
StudySchema LoadSchema(const std::filesystem::path& path);
std::string SerializeSchema(const StudySchema& schema);

using PayloadValue = std::variant<std::int64_t, std::string>;

struct Digest {
  std::string studyId;
  std::string pseudoId;
  Millis windowStart = 0;
  Millis windowEnd = 0;
  std::map<std::string, PayloadValue> payload;
  std::string keyId;
  bool operator==(const Digest&) const = default;
};

class DigestError : public std::runtime_error {
 public:
  enum class Kind { kUndeclaredField, kBadWindow, kMalformed };
  DigestError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

Digest BuildDigest(const std::map<std::string, PayloadValue>& aggregates,
                   const StudySchema& schema, std::string pseudoId, Window window,
                   std::string keyId);
Digest BuildDigest(const std::map<std::string, std::int64_t>& counts,
                   const StudySchema& schema, std::string pseudoId, Window window,
                   std::string keyId);

struct DigestViolation {
  std::string field;
  std::string reason;
  bool operator==(const DigestViolation&) const = default;
};

// Empty result means the digest conforms to the schema.
std::vector<DigestViolation> ValidateDigest(const Digest& digest,
                                            const StudySchema& schema);

std::string SerializeDigest(const Digest& digest);
Digest ParseDigest(std::string_view json);

// Envelope around stored digests. Real ciphers plug in here; the keyId names
// the study key the envelope was sealed with.
class Cipher {
 public:
  virtual ~Cipher() = default;
  virtual std::string Seal(std::string_view plaintext) const = 0;
  virtual std::string Open(std::string_view sealed) const = 0;
};

class PlaintextCipher final : public Cipher {
 public:
  std::string Seal(std::string_view plaintext) const override {
    return std::string(plaintext);
  }
  std::string Open(std::string_view sealed) const override {
    return std::string(sealed);
  }
};

class StoreUnreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// On-disk digest store: {root}/{studyId}/{pseudoId}/{windowStart}.json.
// Single writer per root.
class DigestStore {
 public:
  explicit DigestStore(std::filesystem::path root,
                       std::shared_ptr<const Cipher> cipher = nullptr);

  std::filesystem::path PathFor(const Digest& digest) const;
  std::filesystem::path Write(const Digest& digest) const;
  std::vector<Digest> ReadAll() const;

  // Both return the number of digest files removed.
  std::int64_t DeleteParticipant(std::string_view pseudoId) const;
  std::int64_t RetentionSweep(Millis nowMs, Millis maxAgeMs = kRawRetentionMs) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::vector<std::filesystem::path> DigestFiles() const;
  Digest ReadFile(const std::filesystem::path& path) const;

  std::filesystem::path root_;
  std::shared_ptr<const Cipher> cipher_;
};

}  // namespace webmeter

#endif  // WEBMETER_PRIVACY_H_
