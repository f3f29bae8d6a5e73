#include "webmeter/privacy.h"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace webmeter {

namespace fs = std::filesystem;

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr std::string_view kValueTypeNames[] = {"count", "category", "timestamp-bucket"};
constexpr std::string_view kRiskNames[] = {"low", "medium", "high"};
constexpr std::string_view kDigestExtension = ".json";

template <typename Enum, size_t N>
std::optional<Enum> Lookup(const std::string_view (&names)[N], std::string_view text) {
  for (size_t i = 0; i < N; ++i) {
    if (names[i] == text)
      return static_cast<Enum>(i);
  }
  return std::nullopt;
}

bool SafePathComponent(std::string_view s) {
  return !s.empty() && s != "." && s != ".." &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) {
           return std::isalnum(c) || c == '-' || c == '_' || c == '.';
         });
}

std::string ReadWholeFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw StoreUnreadable("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Window WindowContaining(Millis studyTimeMs, Millis lengthMs) {
  Millis start = studyTimeMs - (studyTimeMs % lengthMs);
  if (studyTimeMs < 0 && studyTimeMs % lengthMs != 0)
    start -= lengthMs;
  return Window{start, start + lengthMs};
}

std::string PseudoId(std::string_view studyId, std::string_view participantSecret) {
  if (studyId.empty() || participantSecret.empty())
    throw EmptyInput();
  const std::string message = "webmeter-study-id:" + std::string(studyId);
  unsigned char mac[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  HMAC(EVP_sha256(), participantSecret.data(), static_cast<int>(participantSecret.size()),
       reinterpret_cast<const unsigned char*>(message.data()), message.size(), mac,
       &length);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[mac[i] >> 4];
    out += kHex[mac[i] & 0xf];
  }
  return out;
}

std::string_view ToString(ValueType type) {
  return kValueTypeNames[static_cast<size_t>(type)];
}

std::string_view ToString(RiskLabel label) {
  return kRiskNames[static_cast<size_t>(label)];
}

const SchemaField* StudySchema::Find(std::string_view name) const {
  auto it = std::find_if(fields.begin(), fields.end(),
                         [&](const SchemaField& f) { return f.name == name; });
  return it == fields.end() ? nullptr : &*it;
}

StudySchema ParseSchema(std::string_view text) {
  Json root = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!root.is_object())
    throw SchemaError("schema is not a JSON object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (it.key() != "studyId" && it.key() != "fields")
      throw SchemaError("unknown schema key '" + it.key() + "'");
  }
  if (!root.contains("studyId") || !root["studyId"].is_string())
    throw SchemaError("studyId must be a string");
  if (!root.contains("fields") || !root["fields"].is_array())
    throw SchemaError("fields must be an array");

  StudySchema schema;
  schema.studyId = root["studyId"].get<std::string>();
  if (!SafePathComponent(schema.studyId))
    throw SchemaError("studyId must be [A-Za-z0-9._-]+");

  std::set<std::string> names;
  for (const Json& f : root["fields"]) {
    if (!f.is_object())
      throw SchemaError("field entries must be objects");
    for (auto it = f.begin(); it != f.end(); ++it) {
      if (it.key() != "name" && it.key() != "valueType" && it.key() != "riskLabel")
        throw SchemaError("unknown field key '" + it.key() + "'");
    }
    auto text_of = [&](const char* key) {
      if (!f.contains(key) || !f[key].is_string())
        throw SchemaError(std::string("field ") + key + " must be a string");
      return f[key].get<std::string>();
    };
    SchemaField field;
    field.name = text_of("name");
    if (field.name.empty())
      throw SchemaError("field name must be non-empty");
    auto type = Lookup<ValueType>(kValueTypeNames, text_of("valueType"));
    if (!type)
      throw SchemaError("bad valueType for " + field.name);
    if (!f.contains("riskLabel"))
      throw SchemaError("field " + field.name + " has no riskLabel");
    auto risk = Lookup<RiskLabel>(kRiskNames, text_of("riskLabel"));
    if (!risk)
      throw SchemaError("bad riskLabel for " + field.name);
    field.valueType = *type;
    field.riskLabel = *risk;
    if (!names.insert(field.name).second)
      throw SchemaError("duplicate field " + field.name);
    schema.fields.push_back(std::move(field));
  }
  return schema;
}

StudySchema LoadSchema(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw SchemaError("cannot read schema " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSchema(buffer.str());
}

std::string SerializeSchema(const StudySchema& schema) {
  OrderedJson root;
  root["studyId"] = schema.studyId;
  root["fields"] = OrderedJson::array();
  for (const SchemaField& f : schema.fields) {
    OrderedJson field;
    field["name"] = f.name;
    field["valueType"] = ToString(f.valueType);
    field["riskLabel"] = ToString(f.riskLabel);
    root["fields"].push_back(std::move(field));
  }
  return root.dump(2) + "\n";
}

Digest BuildDigest(const std::map<std::string, PayloadValue>& aggregates,
                   const StudySchema& schema, std::string pseudoId, Window window,
                   std::string keyId) {
  using Kind = DigestError::Kind;
  if (window.end <= window.start)
    throw DigestError(Kind::kBadWindow, "window end must follow its start");
  for (const auto& [name, value] : aggregates) {
    if (!schema.Find(name))
      throw DigestError(Kind::kUndeclaredField, name);
  }
  Digest digest;
  digest.studyId = schema.studyId;
  digest.pseudoId = std::move(pseudoId);
  digest.windowStart = window.start;
  digest.windowEnd = window.end;
  digest.payload = aggregates;
  digest.keyId = std::move(keyId);
  return digest;
}

Digest BuildDigest(const std::map<std::string, std::int64_t>& counts,
                   const StudySchema& schema, std::string pseudoId, Window window,
                   std::string keyId) {
  std::map<std::string, PayloadValue> payload(counts.begin(), counts.end());
  return BuildDigest(payload, schema, std::move(pseudoId), window, std::move(keyId));
}

std::vector<DigestViolation> ValidateDigest(const Digest& digest,
                                            const StudySchema& schema) {
  std::vector<DigestViolation> violations;
  if (digest.studyId != schema.studyId)
    violations.push_back({"studyId", "digest belongs to study '" + digest.studyId + "'"});
  if (digest.pseudoId.empty())
    violations.push_back({"pseudoId", "empty"});
  if (digest.windowEnd <= digest.windowStart)
    violations.push_back({"windowEnd", "not after windowStart"});
  if (digest.keyId.empty())
    violations.push_back({"keyId", "empty"});
  for (const auto& [name, value] : digest.payload) {
    const SchemaField* field = schema.Find(name);
    if (!field) {
      violations.push_back({name, "undeclared field"});
      continue;
    }
    const auto* number = std::get_if<std::int64_t>(&value);
    switch (field->valueType) {
      case ValueType::kCount:
      case ValueType::kTimestampBucket:
        if (!number)
          violations.push_back({name, "expected an integer"});
        else if (*number < 0)
          violations.push_back({name, "negative value"});
        break;
      case ValueType::kCategory:
        if (number || std::get<std::string>(value).empty())
          violations.push_back({name, "expected a category label"});
        break;
    }
  }
  return violations;
}

std::string SerializeDigest(const Digest& digest) {
  OrderedJson root;
  root["studyId"] = digest.studyId;
  root["pseudoId"] = digest.pseudoId;
  root["windowStart"] = digest.windowStart;
  root["windowEnd"] = digest.windowEnd;
  OrderedJson payload = OrderedJson::object();
  for (const auto& [name, value] : digest.payload) {
    if (const auto* n = std::get_if<std::int64_t>(&value))
      payload[name] = *n;
    else
      payload[name] = std::get<std::string>(value);
  }
  root["payload"] = std::move(payload);
  root["keyId"] = digest.keyId;
  return root.dump(2) + "\n";
}

Digest ParseDigest(std::string_view text) {
  using Kind = DigestError::Kind;
  Json root = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!root.is_object())
    throw DigestError(Kind::kMalformed, "digest is not a JSON object");
  static const std::set<std::string> kKeys = {"studyId",   "pseudoId", "windowStart",
                                              "windowEnd", "payload",  "keyId"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!kKeys.count(it.key()))
      throw DigestError(Kind::kMalformed, "unknown digest key '" + it.key() + "'");
  }
  auto text_of = [&](const char* key) {
    if (!root.contains(key) || !root[key].is_string())
      throw DigestError(Kind::kMalformed, std::string(key) + " must be a string");
    return root[key].get<std::string>();
  };
  auto int_of = [&](const char* key) {
    if (!root.contains(key) || !root[key].is_number_integer())
      throw DigestError(Kind::kMalformed, std::string(key) + " must be an integer");
    return root[key].get<Millis>();
  };
  Digest digest;
  digest.studyId = text_of("studyId");
  digest.pseudoId = text_of("pseudoId");
  digest.windowStart = int_of("windowStart");
  digest.windowEnd = int_of("windowEnd");
  digest.keyId = text_of("keyId");
  if (!root.contains("payload") || !root["payload"].is_object())
    throw DigestError(Kind::kMalformed, "payload must be an object");
  for (auto it = root["payload"].begin(); it != root["payload"].end(); ++it) {
    if (it->is_number_integer())
      digest.payload[it.key()] = it->get<std::int64_t>();
    else if (it->is_string())
      digest.payload[it.key()] = it->get<std::string>();
    else
      throw DigestError(Kind::kMalformed, "payload value for " + it.key());
  }
  return digest;
}

DigestStore::DigestStore(fs::path root, std::shared_ptr<const Cipher> cipher)
    : root_(std::move(root)),
      cipher_(cipher ? std::move(cipher) : std::make_shared<PlaintextCipher>()) {}

fs::path DigestStore::PathFor(const Digest& digest) const {
  if (!SafePathComponent(digest.studyId) || !SafePathComponent(digest.pseudoId)) {
    throw DigestError(DigestError::Kind::kMalformed,
                      "studyId and pseudoId must be plain path components");
  }
  return root_ / digest.studyId / digest.pseudoId /
         (std::to_string(digest.windowStart) + std::string(kDigestExtension));
}

fs::path DigestStore::Write(const Digest& digest) const {
  const fs::path path = PathFor(digest);
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << cipher_->Seal(SerializeDigest(digest));
  if (!out)
    throw StoreUnreadable("cannot write " + path.string());
  return path;
}

std::vector<fs::path> DigestStore::DigestFiles() const {
  std::error_code ec;
  if (!fs::is_directory(root_, ec))
    throw StoreUnreadable("digest store " + root_.string() + " is not a directory");
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root_, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == kDigestExtension)
      files.push_back(it->path());
  }
  if (ec)
    throw StoreUnreadable("cannot scan " + root_.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

Digest DigestStore::ReadFile(const fs::path& path) const {
  try {
    return ParseDigest(cipher_->Open(ReadWholeFile(path)));
  } catch (const DigestError& e) {
    throw StoreUnreadable(path.string() + ": " + e.what());
  }
}

std::vector<Digest> DigestStore::ReadAll() const {
  std::vector<Digest> digests;
  for (const fs::path& path : DigestFiles())
    digests.push_back(ReadFile(path));
  return digests;
}

std::int64_t DigestStore::DeleteParticipant(std::string_view pseudoId) const {
  // Anything else could never have been written, and ".." would escape.
  if (!SafePathComponent(pseudoId))
    return 0;
  std::int64_t removed = 0;
  for (const fs::path& path : DigestFiles()) {
    if (path.parent_path().filename() != pseudoId)
      continue;
    fs::remove(path);
    ++removed;
  }
  std::error_code ec;
  for (const auto& study : fs::directory_iterator(root_, ec)) {
    const fs::path dir = study.path() / std::string(pseudoId);
    if (fs::is_directory(dir))
      fs::remove_all(dir);
  }
  return removed;
}

std::int64_t DigestStore::RetentionSweep(Millis nowMs, Millis maxAgeMs) const {
  std::int64_t removed = 0;
  const Millis cutoff = nowMs - maxAgeMs;
  for (const fs::path& path : DigestFiles()) {
    if (ReadFile(path).windowEnd < cutoff) {
      fs::remove(path);
      ++removed;
    }
  }
  return removed;
}

}  // namespace webmeter
