#include "softid/harvest/conflict.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "softid/core/hash.hpp"
#include "softid/core/jsonl.hpp"

namespace softid::harvest {

namespace {

struct IndexedRecord {
  const SoftwareMetadataRecord* record;
  std::string name;
  std::set<std::string> urls;
  std::set<std::string> non_repository_urls;
};

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) return true;
    if (*ia < *ib) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return false;
}

}  // namespace

std::string normalize_name(std::string_view name) {
  auto trimmable = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  while (!name.empty() && trimmable(name.front())) name.remove_prefix(1);
  while (!name.empty() && trimmable(name.back())) name.remove_suffix(1);
  std::string out(name);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string make_pair_id(std::string_view record_a, std::string_view record_b) {
  std::string key;
  if (record_b < record_a) std::swap(record_a, record_b);
  key.append(record_a).append("\n").append(record_b);
  return "conflict/" + sha256_hex(key);
}

AutoResolveResult auto_resolve(const std::vector<SoftwareMetadataRecord>& corpus,
                               const ForgeHosts& forges) {
  validate_corpus(corpus);

  std::vector<IndexedRecord> indexed;
  indexed.reserve(corpus.size());
  for (const auto& r : corpus) {
    IndexedRecord ir{&r, normalize_name(r.name), {}, {}};
    for (const auto* list : {&r.repository_urls, &r.webpage_urls}) {
      for (const auto& raw : *list) {
        NormalizedUrl url = normalize_url(raw, forges);
        if (!url.is_repository) ir.non_repository_urls.insert(url.canonical);
        ir.urls.insert(std::move(url.canonical));
      }
    }
    indexed.push_back(std::move(ir));
  }
  std::sort(indexed.begin(), indexed.end(), [](const auto& a, const auto& b) {
    return a.record->record_id < b.record->record_id;
  });

  // Blocking: only records sharing a name or a canonical URL can interact.
  std::map<std::string, std::vector<std::size_t>> by_name;
  std::map<std::string, std::vector<std::size_t>> by_url;
  for (std::size_t i = 0; i < indexed.size(); ++i) {
    if (!indexed[i].name.empty()) by_name[indexed[i].name].push_back(i);
    for (const auto& u : indexed[i].urls) by_url[u].push_back(i);
  }
  std::set<std::pair<std::size_t, std::size_t>> candidates;
  auto add_block = [&](const std::vector<std::size_t>& block) {
    for (std::size_t x = 0; x < block.size(); ++x)
      for (std::size_t y = x + 1; y < block.size(); ++y)
        candidates.emplace(block[x], block[y]);
  };
  for (const auto& [_, block] : by_name) add_block(block);
  for (const auto& [_, block] : by_url) add_block(block);

  AutoResolveResult result;
  for (const auto& [i, j] : candidates) {
    const IndexedRecord& a = indexed[i];
    const IndexedRecord& b = indexed[j];
    const bool same_name = !a.name.empty() && a.name == b.name;
    const std::string pair_id = make_pair_id(a.record->record_id, b.record->record_id);

    if (same_name && intersects(a.non_repository_urls, b.non_repository_urls)) {
      result.decisions.push_back(ResolutionDecision{
          pair_id, a.record->record_id, b.record->record_id, Label::kSame, Origin::kAuto,
          std::string(kAutoRuleName)});
      continue;
    }
    if (same_name) {
      result.conflicts.push_back(ConflictPair{pair_id, *a.record, *b.record,
                                              ConflictKind::kNameCollision,
                                              PairStatus::kPending});
    } else if (intersects(a.urls, b.urls)) {
      result.conflicts.push_back(ConflictPair{pair_id, *a.record, *b.record,
                                              ConflictKind::kUrlCollision,
                                              PairStatus::kPending});
    }
  }
  return result;
}

ConflictStats conflict_stats(std::size_t total_records, std::size_t conflict_count) {
  ConflictStats s;
  s.total_records = total_records;
  s.conflict_count = conflict_count;
  s.conflict_fraction =
      total_records == 0 ? 0.0
                         : static_cast<double>(conflict_count) / static_cast<double>(total_records);
  return s;
}

ConflictStats conflict_stats(const std::vector<SoftwareMetadataRecord>& corpus,
                             const std::vector<ConflictPair>& pairs) {
  return conflict_stats(corpus.size(), pairs.size());
}

ForgeHosts load_forge_hosts(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  ForgeHosts hosts = ForgeHosts::defaults();
  auto read_set = [&](const char* key, std::set<std::string>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& h : j.at(key)) {
      std::string host = h.get<std::string>();
      std::transform(host.begin(), host.end(), host.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (host.starts_with("www.")) host.erase(0, 4);
      out.insert(host);
    }
  };
  read_set("repository_hosts", hosts.repository_hosts);
  read_set("package_index_hosts", hosts.package_index_hosts);
  return hosts;
}

}  // namespace softid::harvest
