#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/content/html.hpp"
#include "softid/core/model.hpp"
#include "softid/core/url.hpp"

namespace softid::content {

enum class ExtractorKind { kGeneric, kGithub, kGitlab, kBitbucket, kPypi, kSourceforge };

std::string_view to_string(ExtractorKind kind);
std::optional<ExtractorKind> parse_extractor_kind(std::string_view text);

/// Host-based dispatch; unknown hosts use the generic HTML cleaner.
ExtractorKind select_extractor(const NormalizedUrl& url);

struct FetchStatus {
  enum class Kind { kOk, kHttpError, kTimeout, kUnreachable, kExtractionError };
  Kind kind = Kind::kOk;
  int http_code = 0;

  static FetchStatus ok() { return {}; }
  static FetchStatus http_error(int code) { return {Kind::kHttpError, code}; }
  static FetchStatus timeout() { return {Kind::kTimeout, 0}; }
  static FetchStatus unreachable() { return {Kind::kUnreachable, 0}; }
  static FetchStatus extraction_error() { return {Kind::kExtractionError, 0}; }

  bool is_ok() const { return kind == Kind::kOk; }
  /// "ok", "http_error(404)", "timeout", "unreachable", "extraction_error".
  std::string to_string() const;
  static std::optional<FetchStatus> parse(std::string_view text);

  bool operator==(const FetchStatus&) const = default;
};

struct UrlContent {
  NormalizedUrl url;
  ExtractorKind extractor = ExtractorKind::kGeneric;
  /// Empty iff fetch_status is not ok.
  std::string markdown;
  FetchStatus fetch_status;
  std::int64_t fetched_at_ms = 0;
  /// Bytes received from the transport, summed over API calls.
  std::size_t byte_size = 0;

  bool operator==(const UrlContent& o) const {
    return url.canonical == o.url.canonical && url.original == o.url.original &&
           url.is_repository == o.url.is_repository && extractor == o.extractor &&
           markdown == o.markdown && fetch_status == o.fetch_status &&
           fetched_at_ms == o.fetched_at_ms && byte_size == o.byte_size;
  }
};

void to_json(nlohmann::json& j, const UrlContent& c);
void from_json(const nlohmann::json& j, UrlContent& c);

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

/// Raised by fetchers when no HTTP response was obtained.
class TransportError : public std::runtime_error {
 public:
  enum class Failure { kTimeout, kUnreachable };
  TransportError(Failure failure, const std::string& what)
      : std::runtime_error(what), failure_(failure) {}
  Failure failure() const { return failure_; }

 private:
  Failure failure_;
};

/// Plain GET transport. Implementations must be safe to call concurrently.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual HttpResponse get(const std::string& url, const Headers& headers) = 0;
};

/// Live HTTP(S) via cpp-httplib; follows redirects.
class HttpFetcher : public Fetcher {
 public:
  struct Options {
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{30};
    std::string user_agent = "softid-content-extractor/1.0";
  };
  HttpFetcher();
  explicit HttpFetcher(Options options);
  HttpResponse get(const std::string& url, const Headers& headers) override;

 private:
  Options options_;
};

/// Serves canned responses keyed by exact URL. Unknown URLs are unreachable.
///
/// File format: a JSON object mapping URL to either
/// `{"status": 200, "body": "...", "content_type": "text/html"}` or
/// `{"error": "timeout" | "unreachable"}`.
class FixtureFetcher : public Fetcher {
 public:
  struct Entry {
    std::optional<HttpResponse> response;
    TransportError::Failure failure = TransportError::Failure::kUnreachable;
  };

  FixtureFetcher() = default;
  explicit FixtureFetcher(std::map<std::string, Entry> entries);
  FixtureFetcher(FixtureFetcher&& other) noexcept
      : entries_(std::move(other.entries_)), requests_(std::move(other.requests_)) {}
  static FixtureFetcher load(const std::filesystem::path& path);

  void add(std::string url, HttpResponse response);
  void add_failure(std::string url, TransportError::Failure failure);

  HttpResponse get(const std::string& url, const Headers& headers) override;
  /// URLs requested so far, in request order.
  std::vector<std::string> requests() const;

 private:
  std::map<std::string, Entry> entries_;
  mutable std::mutex mutex_;
  std::vector<std::string> requests_;
};

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

struct ExtractorConfig {
  CleanOptions clean;
  /// Per-host cleaning rules (class selectors); sourceforge.net ships one.
  std::map<std::string, CleanOptions> host_rules;
  std::optional<std::string> github_token;
  std::optional<std::string> gitlab_token;
  std::optional<std::string> bitbucket_token;
  std::function<std::int64_t()> now_ms;

  /// Default rules with tokens taken from GITHUB_TOKEN, GITLAB_TOKEN and
  /// BITBUCKET_TOKEN.
  static ExtractorConfig from_env();
  static ExtractorConfig defaults();
};

/// Fetches one URL with the extractor chosen for its host. Never throws for
/// transport or decoding failures; they land in fetch_status.
UrlContent extract(const NormalizedUrl& url, Fetcher& fetcher, const ExtractorConfig& config);

/// On-disk cache, one JSON file per canonical URL
/// (`<dir>/<sha256(canonical)>.json`).
class ContentCache {
 public:
  explicit ContentCache(std::filesystem::path dir);

  std::optional<UrlContent> load(const std::string& canonical) const;
  void store(const UrlContent& content);
  std::filesystem::path path_for(const std::string& canonical) const;

  /// Mutex guarding one canonical URL; held across fetch-and-store.
  std::mutex& lock_for(const std::string& canonical);

  /// Transient failures (timeouts, unreachable hosts, 5xx) are not cached.
  static bool cacheable(const UrlContent& content);

 private:
  std::filesystem::path dir_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// Cache-aware single fetch. A cache hit returns the stored value unchanged.
UrlContent fetch_content(const NormalizedUrl& url, Fetcher& fetcher,
                         const ExtractorConfig& config, ContentCache* cache);

struct FetchOptions {
  std::size_t parallel = 8;
  /// Minimum spacing between requests to the same host.
  std::chrono::milliseconds politeness_delay{0};
};

/// Fetches every URL concurrently. Returns contents keyed by canonical URL.
std::map<std::string, UrlContent> fetch_all(const std::vector<NormalizedUrl>& urls,
                                            Fetcher& fetcher, const ExtractorConfig& config,
                                            ContentCache* cache, const FetchOptions& options);

/// Every URL of a record, repository URLs first, in listed order.
std::vector<NormalizedUrl> record_urls(const SoftwareMetadataRecord& record,
                                       const ForgeHosts& forges = ForgeHosts::defaults());

/// Unique URLs across all pairs, sorted by canonical form.
std::vector<NormalizedUrl> pair_urls(const std::vector<ConflictPair>& pairs,
                                     const ForgeHosts& forges = ForgeHosts::defaults());

/// Loads every cached entry from a cache directory, keyed by canonical URL.
std::map<std::string, UrlContent> load_cache_dir(const std::filesystem::path& dir);

}  // namespace softid::content
