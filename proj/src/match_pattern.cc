#include "webmeter/match_pattern.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace webmeter {

namespace {

constexpr std::string_view kAllUrlsText = "<all_urls>";

std::string_view KindName(PatternError::Kind kind) {
  switch (kind) {
    case PatternError::Kind::kBadScheme:
      return "BadScheme";
    case PatternError::Kind::kBadHostWildcard:
      return "BadHostWildcard";
    case PatternError::Kind::kMissingPath:
      return "MissingPath";
    case PatternError::Kind::kEmptyHost:
      return "EmptyHost";
    case PatternError::Kind::kBadPort:
      return "BadPort";
  }
  return "?";
}

std::string Trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string(b, e) : std::string();
}

}  // namespace

PatternError::PatternError(Kind kind, std::string_view pattern)
    : std::runtime_error(std::string(KindName(kind)) + ": " +
                         std::string(pattern)),
      kind_(kind) {}

MatchPattern MatchPattern::AllUrls() {
  return MatchPattern();
}

MatchPattern ParsePattern(std::string_view text) {
  using Kind = PatternError::Kind;
  MatchPattern pattern;
  if (text == kAllUrlsText)
    return pattern;

  const size_t sep = text.find("://");
  if (sep == std::string_view::npos)
    throw PatternError(Kind::kBadScheme, text);
  const std::string_view scheme = text.substr(0, sep);
  if (scheme == "http") {
    pattern.scheme_ = MatchPattern::Scheme::kHttp;
  } else if (scheme == "https") {
    pattern.scheme_ = MatchPattern::Scheme::kHttps;
  } else if (scheme == "*") {
    pattern.scheme_ = MatchPattern::Scheme::kAnyHttp;
  } else {
    throw PatternError(Kind::kBadScheme, text);
  }

  const std::string_view rest = text.substr(sep + 3);
  const size_t slash = rest.find('/');
  if (slash == std::string_view::npos)
    throw PatternError(Kind::kMissingPath, text);
  std::string_view host = rest.substr(0, slash);

  if (const size_t colon = host.rfind(':'); colon != std::string_view::npos) {
    const std::string_view port = host.substr(colon + 1);
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(port.data(), port.data() + port.size(), value);
    if (port.empty() || ec != std::errc() || ptr != port.data() + port.size() ||
        value > 65535) {
      throw PatternError(Kind::kBadPort, text);
    }
    host = host.substr(0, colon);
    const std::string_view scheme_for_default =
        pattern.scheme_ == MatchPattern::Scheme::kHttp ? "http" : "https";
    if (pattern.scheme_ == MatchPattern::Scheme::kAnyHttp ||
        DefaultPort(scheme_for_default) != value) {
      pattern.port_ = value;
    }
  }

  if (host.empty())
    throw PatternError(Kind::kEmptyHost, text);
  if (host == "*") {
    pattern.host_.clear();
    pattern.match_subdomains_ = true;
  } else {
    if (host.starts_with("*.")) {
      host.remove_prefix(2);
      pattern.match_subdomains_ = true;
      if (host.empty())
        throw PatternError(Kind::kEmptyHost, text);
    }
    if (host.find('*') != std::string_view::npos)
      throw PatternError(Kind::kBadHostWildcard, text);
    pattern.host_ = std::string(host);
    std::transform(pattern.host_.begin(), pattern.host_.end(),
                   pattern.host_.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  }

  Url path_holder;
  path_holder.path = std::string(rest.substr(slash));
  pattern.path_ = NormalizeParsed(path_holder).path;
  return pattern;
}

bool GlobMatch(std::string_view glob, std::string_view text) {
  size_t g = 0, t = 0;
  size_t star = std::string_view::npos, resume = 0;
  while (t < text.size()) {
    if (g < glob.size() && glob[g] == '*') {
      star = g++;
      resume = t;
    } else if (g < glob.size() && glob[g] == text[t]) {
      ++g;
      ++t;
    } else if (star != std::string_view::npos) {
      g = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (g < glob.size() && glob[g] == '*')
    ++g;
  return g == glob.size();
}

bool MatchPattern::MatchesNormalized(const Url& url) const {
  const bool http = url.scheme == "http";
  const bool https = url.scheme == "https";
  switch (scheme_) {
    case Scheme::kAllUrls:
      return http || https || url.scheme == "ws" || url.scheme == "wss" ||
             url.scheme == "ftp" || url.scheme == "file";
    case Scheme::kHttp:
      if (!http)
        return false;
      break;
    case Scheme::kHttps:
      if (!https)
        return false;
      break;
    case Scheme::kAnyHttp:
      if (!http && !https)
        return false;
      break;
  }

  if (url.port != port_)
    return false;

  if (match_subdomains_) {
    if (!host_.empty() && !HostWithinDomain(url.host, host_))
      return false;
  } else if (url.host != host_) {
    return false;
  }
  return GlobMatch(path_, url.path);
}

bool MatchPattern::Matches(std::string_view url) const {
  return MatchesNormalized(NormalizeParsed(ParseUrl(url)));
}

std::string MatchPattern::ToString() const {
  std::string out;
  switch (scheme_) {
    case Scheme::kAllUrls:
      return std::string(kAllUrlsText);
    case Scheme::kHttp:
      out = "http";
      break;
    case Scheme::kHttps:
      out = "https";
      break;
    case Scheme::kAnyHttp:
      out = "*";
      break;
  }
  out += "://";
  if (match_subdomains_)
    out += host_.empty() ? "*" : "*." + host_;
  else
    out += host_;
  if (port_)
    out += ":" + std::to_string(*port_);
  return out + path_;
}

bool MatchesAny(std::span<const MatchPattern> patterns, std::string_view url) {
  const Url normalized = NormalizeParsed(ParseUrl(url));
  return std::any_of(patterns.begin(), patterns.end(),
                     [&](const MatchPattern& p) {
                       return p.MatchesNormalized(normalized);
                     });
}

std::vector<MatchPattern> ParsePatternList(std::string_view text) {
  std::vector<MatchPattern> patterns;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string trimmed = Trim(line);
    if (!trimmed.empty())
      patterns.push_back(ParsePattern(trimmed));
  }
  return patterns;
}

std::vector<MatchPattern> LoadPatternList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read pattern list " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePatternList(buffer.str());
}

}  // namespace webmeter
