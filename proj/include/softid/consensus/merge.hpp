#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/consensus/proxy.hpp"
#include "softid/harvest/decision.hpp"

namespace softid::consensus {

struct Claim {
  Label outcome = Label::kSame;
  Origin origin = Origin::kAuto;
  std::string provenance;

  bool operator==(const Claim&) const = default;
};

enum class InconsistencyKind {
  /// Claims about one pair disagree; the strongest origin decided, or nothing
  /// did when the strongest origin disagreed with itself.
  kConflictingClaims,
  /// A "different" decision whose records ended up in one group through
  /// other "same" edges.
  kConnectedButDifferent,
};

std::string_view to_string(InconsistencyKind kind);

struct Inconsistency {
  InconsistencyKind kind = InconsistencyKind::kConflictingClaims;
  std::string record_a;
  std::string record_b;
  /// Every claim about the pair, strongest origin first.
  std::vector<Claim> claims;
  /// The claim used for grouping, if any.
  std::optional<Claim> winner;

  bool operator==(const Inconsistency&) const = default;
};

void to_json(nlohmann::json& j, const Inconsistency& i);

struct Group {
  /// Smallest member id.
  std::string group_id;
  /// Sorted.
  std::vector<std::string> members;

  bool operator==(const Group&) const = default;
};

void to_json(nlohmann::json& j, const Group& g);
void from_json(const nlohmann::json& j, Group& g);

struct MergeResult {
  /// Sorted by group_id; a partition of the corpus.
  std::vector<Group> groups;
  /// Sorted by (record_a, record_b, kind).
  std::vector<Inconsistency> inconsistencies;
};

/// Groups records through transitive "same" edges.
///
/// Per record pair, the claim from the strongest origin (human > auto >
/// model_proxy) decides; weaker contradicting claims are reported. A tie of
/// opposite claims at the strongest origin creates no edge and is reported.
/// After union-find, every winning "different" claim whose records share a
/// group is reported. Unclear claims are ignored. Input order does not
/// affect the result.
///
/// Throws ValidationError when a decision names a record outside the corpus.
MergeResult merge_identities(const std::vector<SoftwareMetadataRecord>& corpus,
                             const std::vector<ResolutionDecision>& decisions,
                             const std::vector<ProxyDecision>& proxy_decisions = {});

/// Splits a decisions JSONL (mixed `"type": "resolution"` and
/// `"type": "proxy"` lines) into its two kinds.
struct DecisionLog {
  std::vector<ResolutionDecision> resolutions;
  std::vector<ProxyDecision> proxies;
};

DecisionLog read_decision_log(const std::filesystem::path& path);

}  // namespace softid::consensus
