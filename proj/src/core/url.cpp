#include "softid/core/url.hpp"

#include <algorithm>
#include <cctype>

namespace softid {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string strip_www(std::string host) {
  if (host.starts_with("www.")) host.erase(0, 4);
  return host;
}

bool valid_host_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
         static_cast<unsigned char>(c) >= 0x80;
}

}  // namespace

MalformedUrlError::MalformedUrlError(std::string input)
    : ValidationError("malformed URL: '" + input + "'"),
      input_(std::move(input)) {}

ForgeHosts ForgeHosts::defaults() {
  ForgeHosts f;
  f.repository_hosts = {"github.com", "gitlab.com", "bitbucket.org",
                        "sourceforge.net"};
  f.package_index_hosts = {"pypi.org", "pypi.python.org", "bioconductor.org",
                           "cran.r-project.org", "anaconda.org",
                           "toolshed.g2.bx.psu.edu"};
  return f;
}

bool ForgeHosts::is_repository_host(std::string_view host) const {
  return repository_hosts.contains(strip_www(to_lower(host)));
}

std::string NormalizedUrl::host() const {
  auto slash = canonical.find_first_of("/?");
  return canonical.substr(0, slash);
}

NormalizedUrl normalize_url(std::string_view raw, const ForgeHosts& forges) {
  const std::string_view input = trim(raw);
  if (input.empty()) throw MalformedUrlError(std::string(raw));
  if (std::any_of(input.begin(), input.end(), [](unsigned char c) {
        return std::isspace(c) || c < 0x20;
      })) {
    throw MalformedUrlError(std::string(raw));
  }

  std::string_view rest = input;
  bool has_scheme = false;
  if (auto sep = rest.find("://"); sep != std::string_view::npos) {
    std::string_view scheme = rest.substr(0, sep);
    bool scheme_ok =
        !scheme.empty() && std::isalpha(static_cast<unsigned char>(scheme[0])) &&
        std::all_of(scheme.begin(), scheme.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '+' || c == '-' || c == '.';
        });
    if (!scheme_ok) throw MalformedUrlError(std::string(raw));
    rest.remove_prefix(sep + 3);
    has_scheme = true;
  } else if (rest.starts_with("//")) {
    rest.remove_prefix(2);
  }

  if (auto hash = rest.find('#'); hash != std::string_view::npos)
    rest = rest.substr(0, hash);

  const auto authority_end = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, authority_end);
  std::string_view tail = authority_end == std::string_view::npos
                              ? std::string_view{}
                              : rest.substr(authority_end);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    if (!has_scheme) throw MalformedUrlError(std::string(raw));
    authority.remove_prefix(at + 1);
  }

  std::string_view port;
  if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    port = authority.substr(colon + 1);
    authority = authority.substr(0, colon);
    if (!std::all_of(port.begin(), port.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
      throw MalformedUrlError(std::string(raw));
    }
  }

  std::string host = strip_www(to_lower(authority));
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty() || host.front() == '.' || host.front() == '-' ||
      host.find("..") != std::string::npos ||
      !std::all_of(host.begin(), host.end(), valid_host_char)) {
    throw MalformedUrlError(std::string(raw));
  }

  std::string canonical = host;
  if (!port.empty() && port != "80" && port != "443") {
    canonical += ':';
    canonical += port;
  }
  std::string path = to_lower(tail);
  while (!path.empty() && (path.back() == '/' || path.back() == '?'))
    path.pop_back();
  canonical += path;

  NormalizedUrl out;
  out.is_repository = forges.is_repository_host(host);
  out.canonical = std::move(canonical);
  out.original = std::string(input);
  return out;
}

std::string fetchable_url(const NormalizedUrl& url) {
  if (url.original.find("://") != std::string::npos) return url.original;
  if (url.original.starts_with("//")) return "https:" + url.original;
  return "https://" + url.original;
}

}  // namespace softid
