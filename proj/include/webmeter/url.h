#ifndef WEBMETER_URL_H_
#define WEBMETER_URL_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace webmeter {

class InvalidUrl : public std::runtime_error {
 public:
  explicit InvalidUrl(std::string_view url);
};

// Components of an absolute URL. The parser is deliberately small: it knows
// scheme://[userinfo@]host[:port][/path][?query][#fragment] and nothing else.
struct Url {
  std::string scheme;
  std::string userinfo;
  std::string host;
  std::optional<int> port;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

// Throws InvalidUrl for anything that is not an absolute hierarchical URL.
Url ParseUrl(std::string_view text);

std::optional<int> DefaultPort(std::string_view scheme);

// Lowercases scheme and host, drops default ports, the query and the
// fragment, maps an empty path to "/" and uppercases percent escapes.
// Idempotent.
std::string NormalizeUrl(std::string_view text);
Url NormalizeParsed(Url url);
std::string Serialize(const Url& url);

// "scheme://host/" for the URL, normalized. Used to model trimmed referrers.
std::string OriginOf(std::string_view text);

// Last two labels of the host, or three for a handful of well-known
// two-level public suffixes. IP literals are returned unchanged.
std::string RegistrableDomain(std::string_view host);

// True if |host| equals |domain| or is one of its subdomains.
bool HostWithinDomain(std::string_view host, std::string_view domain);

}  // namespace webmeter

#endif  // WEBMETER_URL_H_
