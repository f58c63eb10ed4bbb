#include "softid/content/extractor.hpp"

#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "softid/core/hash.hpp"
#include "softid/core/jsonl.hpp"

namespace softid::content {

namespace {

constexpr std::string_view kNoTextPlaceholder = "_No textual content could be extracted from this page._";

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path + query
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find_first_of("/?#", host_start);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
    out.target = "/";
  } else {
    out.origin = url.substr(0, path_start);
    out.target = url.substr(path_start);
    if (auto hash = out.target.find('#'); hash != std::string::npos) out.target.resize(hash);
    if (out.target.empty() || out.target[0] != '/') out.target = "/" + out.target;
  }
  if (scheme_end == std::string::npos) out.origin = "https://" + out.origin;
  return out;
}

// Path segments of the URL as originally written (case preserved).
std::vector<std::string> path_segments(const NormalizedUrl& url) {
  std::string target = split_url(fetchable_url(url)).target;
  if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < target.size()) {
    auto end = target.find('/', start);
    if (end == std::string::npos) end = target.size();
    if (end > start) out.push_back(target.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::string strip_git_suffix(std::string repo) {
  if (repo.size() > 4 && repo.ends_with(".git")) repo.resize(repo.size() - 4);
  return repo;
}

std::string json_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

// Performs the HTTP GETs for one extraction and accumulates the byte count.
class Session {
 public:
  Session(Fetcher& fetcher, UrlContent& content) : fetcher_(fetcher), content_(content) {}

  HttpResponse get(const std::string& url, const Headers& headers) {
    HttpResponse r = fetcher_.get(url, headers);
    content_.byte_size += r.body.size();
    return r;
  }

 private:
  Fetcher& fetcher_;
  UrlContent& content_;
};

class HttpStatusError : public std::runtime_error {
 public:
  explicit HttpStatusError(int code) : std::runtime_error("http error"), code(code) {}
  int code;
};

HttpResponse require_ok(HttpResponse r) {
  if (r.status >= 400 || r.status == 0) throw HttpStatusError(r.status == 0 ? 500 : r.status);
  return r;
}

Headers with_token(Headers h, const std::optional<std::string>& token, const char* header,
                   const char* prefix) {
  if (token && !token->empty()) h.emplace_back(header, prefix + *token);
  return h;
}

std::string extract_generic(Session& s, const NormalizedUrl& url, const ExtractorConfig& config) {
  HttpResponse page = require_ok(
      s.get(fetchable_url(url), {{"Accept", "text/html,application/xhtml+xml,text/plain;q=0.8"}}));
  auto rule = config.host_rules.find(url.host());
  if (rule != config.host_rules.end()) {
    std::string focused = clean_html(page.body, rule->second);
    if (!focused.empty()) return focused;
  }
  return clean_html(page.body, config.clean);
}

std::string extract_github(Session& s, const NormalizedUrl& url, const ExtractorConfig& config) {
  auto seg = path_segments(url);
  if (seg.size() < 2) return extract_generic(s, url, config);
  const std::string api = "https://api.github.com/repos/" + seg[0] + "/" + strip_git_suffix(seg[1]);
  const Headers meta_headers = with_token({{"Accept", "application/vnd.github+json"}},
                                          config.github_token, "Authorization", "Bearer ");
  const Headers raw_headers = with_token({{"Accept", "application/vnd.github.raw"}},
                                         config.github_token, "Authorization", "Bearer ");

  auto meta = nlohmann::json::parse(require_ok(s.get(api, meta_headers)).body);
  std::string md = "# " + json_string(meta, "full_name");
  if (auto d = json_string(meta, "description"); !d.empty()) md += "\n\n" + d;
  if (auto h = json_string(meta, "homepage"); !h.empty()) md += "\n\nHomepage: " + h;
  if (auto t = meta.find("topics"); t != meta.end() && t->is_array() && !t->empty()) {
    md += "\n\nTopics:";
    for (const auto& topic : *t) md += " " + topic.get<std::string>();
  }
  HttpResponse readme = s.get(api + "/readme", raw_headers);
  if (readme.status < 400 && !readme.body.empty()) md += "\n\n## README\n\n" + readme.body;
  return clean_html(md, config.clean);
}

std::string extract_gitlab(Session& s, const NormalizedUrl& url, const ExtractorConfig& config) {
  auto seg = path_segments(url);
  std::string project;
  for (const auto& part : seg) {
    if (part == "-") break;
    if (!project.empty()) project += '/';
    project += part;
  }
  if (seg.size() < 2) return extract_generic(s, url, config);
  project = strip_git_suffix(project);
  const std::string api = "https://gitlab.com/api/v4/projects/" + percent_encode(project);
  const Headers headers = with_token({}, config.gitlab_token, "PRIVATE-TOKEN", "");

  auto meta = nlohmann::json::parse(require_ok(s.get(api, headers)).body);
  std::string md = "# " + json_string(meta, "name_with_namespace");
  if (auto d = json_string(meta, "description"); !d.empty()) md += "\n\n" + d;
  std::string branch = json_string(meta, "default_branch");
  if (branch.empty()) branch = "main";
  HttpResponse readme =
      s.get(api + "/repository/files/README.md/raw?ref=" + percent_encode(branch), headers);
  if (readme.status < 400 && !readme.body.empty()) md += "\n\n## README\n\n" + readme.body;
  return clean_html(md, config.clean);
}

std::string extract_bitbucket(Session& s, const NormalizedUrl& url, const ExtractorConfig& config) {
  auto seg = path_segments(url);
  if (seg.size() < 2) return extract_generic(s, url, config);
  const std::string api =
      "https://api.bitbucket.org/2.0/repositories/" + seg[0] + "/" + strip_git_suffix(seg[1]);
  const Headers headers = with_token({}, config.bitbucket_token, "Authorization", "Bearer ");

  auto meta = nlohmann::json::parse(require_ok(s.get(api, headers)).body);
  std::string md = "# " + json_string(meta, "full_name");
  if (auto d = json_string(meta, "description"); !d.empty()) md += "\n\n" + d;
  if (auto w = json_string(meta, "website"); !w.empty()) md += "\n\nWebsite: " + w;
  std::string branch = "master";
  if (auto mb = meta.find("mainbranch"); mb != meta.end() && mb->is_object())
    if (auto name = json_string(*mb, "name"); !name.empty()) branch = name;
  HttpResponse readme = s.get(api + "/src/" + branch + "/README.md", headers);
  if (readme.status < 400 && !readme.body.empty()) md += "\n\n## README\n\n" + readme.body;
  return clean_html(md, config.clean);
}

std::string extract_pypi(Session& s, const NormalizedUrl& url, const ExtractorConfig& config) {
  auto seg = path_segments(url);
  if (seg.size() < 2 || (seg[0] != "project" && seg[0] != "pypi"))
    return extract_generic(s, url, config);
  auto meta =
      nlohmann::json::parse(require_ok(s.get("https://pypi.org/pypi/" + seg[1] + "/json", {})).body);
  const nlohmann::json info = meta.value("info", nlohmann::json::object());
  std::string md = "# " + json_string(info, "name");
  if (auto v = json_string(info, "summary"); !v.empty()) md += "\n\n" + v;
  if (auto v = json_string(info, "home_page"); !v.empty()) md += "\n\nHomepage: " + v;
  if (auto pu = info.find("project_urls"); pu != info.end() && pu->is_object() && !pu->empty()) {
    md += "\n\nProject URLs:";
    for (const auto& [k, v] : pu->items())
      if (v.is_string()) md += "\n- " + k + ": " + v.get<std::string>();
  }
  if (auto v = json_string(info, "description"); !v.empty()) md += "\n\n## Description\n\n" + v;
  return clean_html(md, config.clean);
}

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Spaces requests to the same host by at least `delay`.
class HostThrottle {
 public:
  explicit HostThrottle(std::chrono::milliseconds delay) : delay_(delay) {}

  void acquire(const std::string& host) {
    if (delay_.count() <= 0) return;
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      auto now = std::chrono::steady_clock::now();
      auto& next = next_[host];
      slot = std::max(now, next);
      next = slot + delay_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds delay_;
  std::mutex mutex_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

}  // namespace

std::string_view to_string(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::kGeneric: return "generic";
    case ExtractorKind::kGithub: return "github";
    case ExtractorKind::kGitlab: return "gitlab";
    case ExtractorKind::kBitbucket: return "bitbucket";
    case ExtractorKind::kPypi: return "pypi";
    case ExtractorKind::kSourceforge: return "sourceforge";
  }
  return "generic";
}

std::optional<ExtractorKind> parse_extractor_kind(std::string_view text) {
  for (auto k : {ExtractorKind::kGeneric, ExtractorKind::kGithub, ExtractorKind::kGitlab,
                 ExtractorKind::kBitbucket, ExtractorKind::kPypi, ExtractorKind::kSourceforge}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

ExtractorKind select_extractor(const NormalizedUrl& url) {
  const std::string host = url.host();
  if (host == "github.com") return ExtractorKind::kGithub;
  if (host == "gitlab.com") return ExtractorKind::kGitlab;
  if (host == "bitbucket.org") return ExtractorKind::kBitbucket;
  if (host == "pypi.org" || host == "pypi.python.org") return ExtractorKind::kPypi;
  if (host == "sourceforge.net" || host.ends_with(".sourceforge.net"))
    return ExtractorKind::kSourceforge;
  return ExtractorKind::kGeneric;
}

std::string FetchStatus::to_string() const {
  switch (kind) {
    case Kind::kOk: return "ok";
    case Kind::kHttpError: return "http_error(" + std::to_string(http_code) + ")";
    case Kind::kTimeout: return "timeout";
    case Kind::kUnreachable: return "unreachable";
    case Kind::kExtractionError: return "extraction_error";
  }
  return "unreachable";
}

std::optional<FetchStatus> FetchStatus::parse(std::string_view text) {
  if (text == "ok") return ok();
  if (text == "timeout") return timeout();
  if (text == "unreachable") return unreachable();
  if (text == "extraction_error") return extraction_error();
  if (text.starts_with("http_error(") && text.ends_with(")")) {
    auto digits = text.substr(11, text.size() - 12);
    if (digits.empty() || digits.size() > 3) return std::nullopt;
    int code = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      code = code * 10 + (c - '0');
    }
    return http_error(code);
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const UrlContent& c) {
  j = nlohmann::json{
      {"schema", kSchemaVersion},
      {"url",
       {{"canonical", c.url.canonical},
        {"original", c.url.original},
        {"is_repository", c.url.is_repository}}},
      {"extractor", to_string(c.extractor)},
      {"markdown", c.markdown},
      {"fetch_status", c.fetch_status.to_string()},
      {"fetched_at_ms", c.fetched_at_ms},
      {"byte_size", c.byte_size},
  };
}

void from_json(const nlohmann::json& j, UrlContent& c) {
  check_schema(j);
  try {
    const auto& u = j.at("url");
    c.url.canonical = u.at("canonical").get<std::string>();
    c.url.original = u.value("original", c.url.canonical);
    c.url.is_repository = u.value("is_repository", false);
    auto kind = parse_extractor_kind(j.at("extractor").get<std::string>());
    auto status = FetchStatus::parse(j.at("fetch_status").get<std::string>());
    if (!kind || !status) throw ValidationError("bad extractor or fetch_status");
    c.extractor = *kind;
    c.fetch_status = *status;
    c.markdown = j.at("markdown").get<std::string>();
    c.fetched_at_ms = j.value("fetched_at_ms", std::int64_t{0});
    c.byte_size = j.value("byte_size", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed url content: ") + e.what());
  }
  if (c.markdown.empty() == c.fetch_status.is_ok())
    throw ValidationError("url content for '" + c.url.canonical +
                          "': markdown must be empty exactly when the fetch failed");
}

HttpFetcher::HttpFetcher() : HttpFetcher(Options{}) {}
HttpFetcher::HttpFetcher(Options options) : options_(std::move(options)) {}

HttpResponse HttpFetcher::get(const std::string& url, const Headers& headers) {
  const SplitUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  if (!client.is_valid()) throw TransportError(TransportError::Failure::kUnreachable, "invalid URL " + url);
  client.set_follow_location(true);
  client.set_connection_timeout(options_.connect_timeout);
  client.set_read_timeout(options_.read_timeout);
  httplib::Headers h{{"User-Agent", options_.user_agent}};
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto result = client.Get(parts.target, h);
  if (!result) {
    const auto err = result.error();
    const auto failure = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                             ? TransportError::Failure::kTimeout
                             : TransportError::Failure::kUnreachable;
    throw TransportError(failure, url + ": " + httplib::to_string(err));
  }
  return HttpResponse{result->status, result->body, result->get_header_value("Content-Type")};
}

FixtureFetcher::FixtureFetcher(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

FixtureFetcher FixtureFetcher::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  FixtureFetcher out;
  for (const auto& [url, spec] : j.items()) {
    if (spec.contains("error")) {
      const std::string err = spec.at("error").get<std::string>();
      out.add_failure(url, err == "timeout" ? TransportError::Failure::kTimeout
                                            : TransportError::Failure::kUnreachable);
    } else {
      out.add(url, HttpResponse{spec.value("status", 200), spec.value("body", ""),
                                spec.value("content_type", "text/html")});
    }
  }
  return out;
}

void FixtureFetcher::add(std::string url, HttpResponse response) {
  entries_[std::move(url)] = Entry{std::move(response), {}};
}

void FixtureFetcher::add_failure(std::string url, TransportError::Failure failure) {
  entries_[std::move(url)] = Entry{std::nullopt, failure};
}

HttpResponse FixtureFetcher::get(const std::string& url, const Headers&) {
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(url);
  }
  auto it = entries_.find(url);
  if (it == entries_.end())
    throw TransportError(TransportError::Failure::kUnreachable, "no fixture for " + url);
  if (!it->second.response) throw TransportError(it->second.failure, "fixture failure for " + url);
  return *it->second.response;
}

std::vector<std::string> FixtureFetcher::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

ExtractorConfig ExtractorConfig::defaults() {
  ExtractorConfig c;
  CleanOptions sourceforge;
  sourceforge.keep_classes = {"description", "features", "project-description", "summary"};
  sourceforge.drop_classes = {"sidebar", "ad", "promo"};
  c.host_rules["sourceforge.net"] = sourceforge;
  c.now_ms = system_now_ms;
  return c;
}

ExtractorConfig ExtractorConfig::from_env() {
  ExtractorConfig c = defaults();
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  c.github_token = env("GITHUB_TOKEN");
  c.gitlab_token = env("GITLAB_TOKEN");
  c.bitbucket_token = env("BITBUCKET_TOKEN");
  return c;
}

UrlContent extract(const NormalizedUrl& url, Fetcher& fetcher, const ExtractorConfig& config) {
  UrlContent content;
  content.url = url;
  content.extractor = select_extractor(url);
  content.fetched_at_ms = config.now_ms ? config.now_ms() : system_now_ms();
  Session session(fetcher, content);
  try {
    std::string md;
    switch (content.extractor) {
      case ExtractorKind::kGithub: md = extract_github(session, url, config); break;
      case ExtractorKind::kGitlab: md = extract_gitlab(session, url, config); break;
      case ExtractorKind::kBitbucket: md = extract_bitbucket(session, url, config); break;
      case ExtractorKind::kPypi: md = extract_pypi(session, url, config); break;
      case ExtractorKind::kSourceforge:
      case ExtractorKind::kGeneric: md = extract_generic(session, url, config); break;
    }
    content.markdown = md.empty() ? std::string(kNoTextPlaceholder) : std::move(md);
    content.fetch_status = FetchStatus::ok();
  } catch (const HttpStatusError& e) {
    content.fetch_status = FetchStatus::http_error(e.code);
    content.markdown.clear();
  } catch (const TransportError& e) {
    content.fetch_status = e.failure() == TransportError::Failure::kTimeout
                               ? FetchStatus::timeout()
                               : FetchStatus::unreachable();
    content.markdown.clear();
  } catch (const ExtractionError&) {
    content.fetch_status = FetchStatus::extraction_error();
    content.markdown.clear();
  } catch (const nlohmann::json::exception&) {
    content.fetch_status = FetchStatus::extraction_error();
    content.markdown.clear();
  }
  return content;
}

ContentCache::ContentCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ContentCache::path_for(const std::string& canonical) const {
  return dir_ / (sha256_hex(canonical) + ".json");
}

std::optional<UrlContent> ContentCache::load(const std::string& canonical) const {
  const auto path = path_for(canonical);
  if (!std::filesystem::exists(path)) return std::nullopt;
  auto j = nlohmann::json::parse(jsonl::read_file(path), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  try {
    auto c = j.get<UrlContent>();
    if (c.url.canonical != canonical) return std::nullopt;
    return c;
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

void ContentCache::store(const UrlContent& content) {
  nlohmann::json j = content;
  jsonl::write_file_atomic(path_for(content.url.canonical), j.dump(2) + "\n");
}

std::mutex& ContentCache::lock_for(const std::string& canonical) {
  std::lock_guard lock(map_mutex_);
  auto& slot = locks_[canonical];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

bool ContentCache::cacheable(const UrlContent& content) {
  switch (content.fetch_status.kind) {
    case FetchStatus::Kind::kOk:
    case FetchStatus::Kind::kExtractionError: return true;
    case FetchStatus::Kind::kHttpError: return content.fetch_status.http_code < 500;
    default: return false;
  }
}

UrlContent fetch_content(const NormalizedUrl& url, Fetcher& fetcher, const ExtractorConfig& config,
                         ContentCache* cache) {
  if (cache == nullptr) return extract(url, fetcher, config);
  std::lock_guard lock(cache->lock_for(url.canonical));
  if (auto hit = cache->load(url.canonical)) return *hit;
  UrlContent fresh = extract(url, fetcher, config);
  if (ContentCache::cacheable(fresh)) cache->store(fresh);
  return fresh;
}

std::map<std::string, UrlContent> fetch_all(const std::vector<NormalizedUrl>& urls,
                                            Fetcher& fetcher, const ExtractorConfig& config,
                                            ContentCache* cache, const FetchOptions& options) {
  std::vector<UrlContent> results(urls.size());
  std::atomic<std::size_t> next{0};
  HostThrottle throttle(options.politeness_delay);

  auto worker = [&] {
    for (std::size_t i = next++; i < urls.size(); i = next++) {
      if (cache != nullptr) {
        if (auto hit = cache->load(urls[i].canonical)) {
          results[i] = std::move(*hit);
          continue;
        }
      }
      throttle.acquire(urls[i].host());
      results[i] = fetch_content(urls[i], fetcher, config, cache);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallel, urls.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::map<std::string, UrlContent> out;
  for (auto& r : results) out.emplace(r.url.canonical, std::move(r));
  return out;
}

std::vector<NormalizedUrl> record_urls(const SoftwareMetadataRecord& record, const ForgeHosts& forges) {
  std::vector<NormalizedUrl> out;
  std::set<std::string> seen;
  for (const auto* list : {&record.repository_urls, &record.webpage_urls}) {
    for (const auto& raw : *list) {
      auto u = normalize_url(raw, forges);
      if (seen.insert(u.canonical).second) out.push_back(std::move(u));
    }
  }
  return out;
}

std::vector<NormalizedUrl> pair_urls(const std::vector<ConflictPair>& pairs, const ForgeHosts& forges) {
  std::map<std::string, NormalizedUrl> unique;
  for (const auto& p : pairs) {
    for (const auto* r : {&p.record_a, &p.record_b})
      for (auto& u : record_urls(*r, forges)) unique.emplace(u.canonical, std::move(u));
  }
  std::vector<NormalizedUrl> out;
  for (auto& [_, u] : unique) out.push_back(std::move(u));
  return out;
}

std::map<std::string, UrlContent> load_cache_dir(const std::filesystem::path& dir) {
  std::map<std::string, UrlContent> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    auto j = nlohmann::json::parse(jsonl::read_file(entry.path()), nullptr, false);
    if (j.is_discarded()) continue;
    try {
      auto c = j.get<UrlContent>();
      out.emplace(c.url.canonical, std::move(c));
    } catch (const ValidationError&) {
    }
  }
  return out;
}

}  // namespace softid::content
