#ifndef WEBMETER_MATCH_PATTERN_H_
#define WEBMETER_MATCH_PATTERN_H_

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webmeter/url.h"

namespace webmeter {

class PatternError : public std::runtime_error {
 public:
  enum class Kind { kBadScheme, kBadHostWildcard, kMissingPath, kEmptyHost, kBadPort };

  PatternError(Kind kind, std::string_view pattern);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// A URL match pattern: "<all_urls>" or scheme://host[:port]/path where the
// scheme is http, https or "*" (either), the host is exact, "*", or
// "*.suffix" (the suffix and all its subdomains), and the path is a glob in
// which "*" matches any run of characters. Queries and fragments of the
// candidate URL are never seen by the path glob.
class MatchPattern {
 public:
  enum class Scheme { kHttp, kHttps, kAnyHttp, kAllUrls };

  static MatchPattern AllUrls();

  // Throws InvalidUrl when |url| is not absolute.
  bool Matches(std::string_view url) const;
  bool MatchesNormalized(const Url& normalized) const;

  Scheme scheme() const { return scheme_; }
  const std::string& host() const { return host_; }
  bool match_subdomains() const { return match_subdomains_; }
  std::optional<int> port() const { return port_; }
  const std::string& path() const { return path_; }

  std::string ToString() const;

  bool operator==(const MatchPattern&) const = default;

 private:
  friend MatchPattern ParsePattern(std::string_view text);

  Scheme scheme_ = Scheme::kAllUrls;
  std::string host_;
  bool match_subdomains_ = false;
  std::optional<int> port_;
  std::string path_;
};

// Throws PatternError.
MatchPattern ParsePattern(std::string_view text);

bool GlobMatch(std::string_view glob, std::string_view text);

bool MatchesAny(std::span<const MatchPattern> patterns, std::string_view url);

// Newline-separated patterns; blank lines and "#" comments are skipped.
std::vector<MatchPattern> ParsePatternList(std::string_view text);
std::vector<MatchPattern> LoadPatternList(const std::filesystem::path& path);

}  // namespace webmeter

#endif  // WEBMETER_MATCH_PATTERN_H_
