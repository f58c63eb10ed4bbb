#include "softid/consensus/merge.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "softid/core/jsonl.hpp"

namespace softid::consensus {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

bool claim_less(const Claim& a, const Claim& b) {
  if (a.origin != b.origin) return a.origin > b.origin;
  if (a.outcome != b.outcome) return a.outcome < b.outcome;
  return a.provenance < b.provenance;
}

}  // namespace

std::string_view to_string(InconsistencyKind kind) {
  return kind == InconsistencyKind::kConflictingClaims ? "conflicting_claims"
                                                       : "connected_but_different";
}

void to_json(nlohmann::json& j, const Inconsistency& i) {
  nlohmann::json claims = nlohmann::json::array();
  for (const auto& c : i.claims)
    claims.push_back({{"outcome", to_string(c.outcome)},
                      {"origin", to_string(c.origin)},
                      {"provenance", c.provenance}});
  j = nlohmann::json{{"schema", kSchemaVersion},
                     {"kind", to_string(i.kind)},
                     {"record_a", i.record_a},
                     {"record_b", i.record_b},
                     {"claims", claims}};
  if (i.winner) {
    j["winner"] = {{"outcome", to_string(i.winner->outcome)},
                   {"origin", to_string(i.winner->origin)},
                   {"provenance", i.winner->provenance}};
  } else {
    j["winner"] = nullptr;
  }
}

void to_json(nlohmann::json& j, const Group& g) {
  j = nlohmann::json{{"schema", kSchemaVersion}, {"group_id", g.group_id}, {"members", g.members}};
}

void from_json(const nlohmann::json& j, Group& g) {
  check_schema(j);
  try {
    g.group_id = j.at("group_id").get<std::string>();
    g.members = j.at("members").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed group: ") + e.what());
  }
}

MergeResult merge_identities(const std::vector<SoftwareMetadataRecord>& corpus,
                             const std::vector<ResolutionDecision>& decisions,
                             const std::vector<ProxyDecision>& proxy_decisions) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& r : corpus) ids.push_back(r.record_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ValidationError("corpus has duplicate record ids");
  auto index_of = [&](const std::string& id) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id)
      throw ValidationError("decision references record '" + id + "' outside the corpus");
    return static_cast<std::size_t>(it - ids.begin());
  };

  // Claims per unordered record pair, keyed by sorted indices.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Claim>> claims;
  auto add = [&](const ResolutionDecision& d) {
    if (d.outcome == Label::kUnclear) return;
    std::size_t a = index_of(d.record_a);
    std::size_t b = index_of(d.record_b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    claims[{a, b}].push_back(Claim{d.outcome, d.origin, d.provenance});
  };
  for (const auto& d : decisions) add(d);
  for (const auto& p : proxy_decisions)
    if (auto d = to_resolution(p)) add(*d);

  MergeResult out;
  UnionFind uf(ids.size());
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, Claim>> different_edges;

  for (auto& [key, cs] : claims) {
    std::sort(cs.begin(), cs.end(), claim_less);
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    const Origin top = cs.front().origin;
    bool top_same = false;
    bool top_different = false;
    bool any_same = false;
    bool any_different = false;
    for (const auto& c : cs) {
      (c.outcome == Label::kSame ? any_same : any_different) = true;
      if (c.origin == top) (c.outcome == Label::kSame ? top_same : top_different) = true;
    }
    std::optional<Claim> winner;
    if (!(top_same && top_different)) winner = cs.front();
    if (winner && winner->outcome == Label::kSame) uf.unite(key.first, key.second);
    if (winner && winner->outcome == Label::kDifferent) different_edges.emplace_back(key, *winner);
    if (any_same && any_different) {
      out.inconsistencies.push_back(Inconsistency{InconsistencyKind::kConflictingClaims,
                                                  ids[key.first], ids[key.second], cs, winner});
    }
  }

  for (const auto& [key, claim] : different_edges) {
    if (uf.find(key.first) == uf.find(key.second)) {
      out.inconsistencies.push_back(Inconsistency{InconsistencyKind::kConnectedButDifferent,
                                                  ids[key.first], ids[key.second],
                                                  claims.at(key), claim});
    }
  }

  std::map<std::size_t, Group> groups;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto& g = groups[uf.find(i)];
    if (g.members.empty()) g.group_id = ids[i];
    g.members.push_back(ids[i]);
  }
  for (auto& [root, g] : groups) out.groups.push_back(std::move(g));
  std::sort(out.groups.begin(), out.groups.end(),
            [](const Group& a, const Group& b) { return a.group_id < b.group_id; });
  std::sort(out.inconsistencies.begin(), out.inconsistencies.end(),
            [](const Inconsistency& a, const Inconsistency& b) {
              return std::tie(a.record_a, a.record_b, a.kind) <
                     std::tie(b.record_a, b.record_b, b.kind);
            });
  return out;
}

DecisionLog read_decision_log(const std::filesystem::path& path) {
  DecisionLog log;
  jsonl::for_each(path, [&](const nlohmann::json& j) {
    const std::string type = j.value("type", "");
    if (type == "resolution") {
      log.resolutions.push_back(j.get<ResolutionDecision>());
    } else if (type == "proxy") {
      log.proxies.push_back(j.get<ProxyDecision>());
    } else {
      throw ValidationError("decision line has unknown type '" + type + "'");
    }
  });
  return log;
}

}  // namespace softid::consensus
