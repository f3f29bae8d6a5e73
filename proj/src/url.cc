#include "webmeter/url.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace webmeter {

namespace {

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsSchemeChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' ||
         c == '-' || c == '.';
}

bool HasForbiddenChar(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return c <= 0x20 || c == 0x7f || c == '<' || c == '>' || c == '"' ||
           c == '\\';
  });
}

std::string UppercaseEscapes(std::string_view s) {
  std::string out(s);
  for (size_t i = 0; i + 2 < out.size(); ++i) {
    if (out[i] == '%' && std::isxdigit(static_cast<unsigned char>(out[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(out[i + 2]))) {
      out[i + 1] = static_cast<char>(
          std::toupper(static_cast<unsigned char>(out[i + 1])));
      out[i + 2] = static_cast<char>(
          std::toupper(static_cast<unsigned char>(out[i + 2])));
      i += 2;
    }
  }
  return out;
}

constexpr std::array<std::string_view, 8> kTwoLevelSuffixes = {
    "co.uk", "org.uk", "ac.uk", "gov.uk", "com.au", "net.au", "co.jp", "co.nz"};

}  // namespace

InvalidUrl::InvalidUrl(std::string_view url)
    : std::runtime_error("invalid URL: " + std::string(url)) {}

Url ParseUrl(std::string_view text) {
  if (text.empty() || HasForbiddenChar(text))
    throw InvalidUrl(text);

  const size_t sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0 ||
      !std::isalpha(static_cast<unsigned char>(text[0])) ||
      !std::all_of(text.begin(), text.begin() + sep, IsSchemeChar)) {
    throw InvalidUrl(text);
  }

  Url url;
  url.scheme = ToLower(text.substr(0, sep));
  std::string_view rest = text.substr(sep + 3);

  if (const size_t hash = rest.find('#'); hash != std::string_view::npos) {
    url.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (const size_t q = rest.find('?'); q != std::string_view::npos) {
    url.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  const size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos)
    url.path = std::string(rest.substr(slash));

  if (const size_t at = authority.rfind('@'); at != std::string_view::npos) {
    url.userinfo = std::string(authority.substr(0, at));
    authority = authority.substr(at + 1);
  }

  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    const size_t close = authority.find(']');
    if (close == std::string_view::npos)
      throw InvalidUrl(text);
    host = authority.substr(0, close + 1);
    std::string_view tail = authority.substr(close + 1);
    if (!tail.empty()) {
      if (tail.front() != ':')
        throw InvalidUrl(text);
      port = tail.substr(1);
    }
  } else if (const size_t colon = authority.rfind(':');
             colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }

  if (!port.empty()) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value < 0 ||
        value > 65535) {
      throw InvalidUrl(text);
    }
    url.port = value;
  }

  if (host.find_first_of("%*") != std::string_view::npos)
    throw InvalidUrl(text);
  if (host.empty() && url.scheme != "file")
    throw InvalidUrl(text);
  url.host = ToLower(host);
  return url;
}

std::optional<int> DefaultPort(std::string_view scheme) {
  if (scheme == "http" || scheme == "ws")
    return 80;
  if (scheme == "https" || scheme == "wss")
    return 443;
  if (scheme == "ftp")
    return 21;
  return std::nullopt;
}

Url NormalizeParsed(Url url) {
  if (url.port && url.port == DefaultPort(url.scheme))
    url.port.reset();
  if (url.path.empty())
    url.path = "/";
  url.path = UppercaseEscapes(url.path);
  url.userinfo = UppercaseEscapes(url.userinfo);
  url.query.reset();
  url.fragment.reset();
  return url;
}

std::string Serialize(const Url& url) {
  std::string out = url.scheme + "://";
  if (!url.userinfo.empty())
    out += url.userinfo + "@";
  out += url.host;
  if (url.port)
    out += ":" + std::to_string(*url.port);
  out += url.path;
  if (url.query)
    out += "?" + *url.query;
  if (url.fragment)
    out += "#" + *url.fragment;
  return out;
}

std::string NormalizeUrl(std::string_view text) {
  return Serialize(NormalizeParsed(ParseUrl(text)));
}

std::string OriginOf(std::string_view text) {
  Url url = NormalizeParsed(ParseUrl(text));
  url.userinfo.clear();
  url.path = "/";
  return Serialize(url);
}

std::string RegistrableDomain(std::string_view host) {
  if (host.empty() || host.front() == '[' ||
      std::all_of(host.begin(), host.end(), [](unsigned char c) {
        return std::isdigit(c) || c == '.';
      })) {
    return std::string(host);
  }
  auto last_labels = [&](int n) -> std::string_view {
    size_t begin = host.size();
    for (int i = 0; i < n; ++i) {
      if (begin == 0)
        return host;
      const size_t dot = host.rfind('.', begin - 1);
      if (dot == std::string_view::npos)
        return host;
      begin = dot;
    }
    return host.substr(begin + 1);
  };
  const std::string_view two = last_labels(2);
  for (std::string_view suffix : kTwoLevelSuffixes) {
    if (two == suffix)
      return std::string(last_labels(3));
  }
  return std::string(two);
}

bool HostWithinDomain(std::string_view host, std::string_view domain) {
  if (domain.empty())
    return false;
  if (host == domain)
    return true;
  return host.size() > domain.size() && host.ends_with(domain) &&
         host[host.size() - domain.size() - 1] == '.';
}

}  // namespace webmeter
