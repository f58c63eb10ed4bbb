#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "softid/core/errors.hpp"

namespace softid {

class MalformedUrlError : public ValidationError {
 public:
  explicit MalformedUrlError(std::string input);
  const std::string& input() const { return input_; }

 private:
  std::string input_;
};

/// Host lists used to classify URLs. Hosts are compared after lowercasing
/// and stripping a leading "www.".
struct ForgeHosts {
  /// Source-code forges; URLs on these hosts count as repositories.
  std::set<std::string> repository_hosts;
  /// Package indexes. Treated as non-repository pages.
  std::set<std::string> package_index_hosts;

  static ForgeHosts defaults();
  bool is_repository_host(std::string_view host) const;
};

struct NormalizedUrl {
  /// host + path, lowercased, no scheme, no "www.", no trailing slash.
  std::string canonical;
  bool is_repository = false;
  /// The string the URL was parsed from; used when it has to be fetched.
  std::string original;

  std::string host() const;

  friend bool operator==(const NormalizedUrl& a, const NormalizedUrl& b) {
    return a.canonical == b.canonical;
  }
  friend auto operator<=>(const NormalizedUrl& a, const NormalizedUrl& b) {
    return a.canonical <=> b.canonical;
  }
};

/// Canonicalizes a URL. Throws MalformedUrlError when no host can be parsed.
NormalizedUrl normalize_url(std::string_view raw,
                            const ForgeHosts& forges = ForgeHosts::defaults());

/// Builds a fetchable absolute URL from the original input (adds https:// when
/// the scheme was omitted).
std::string fetchable_url(const NormalizedUrl& url);

}  // namespace softid
