#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "softid/core/model.hpp"
#include "softid/core/url.hpp"
#include "softid/harvest/decision.hpp"

namespace softid::harvest {

inline constexpr std::string_view kAutoRuleName = "same_name_shared_non_repository_url";

/// Lowercases and trims surrounding whitespace and punctuation. Returns an
/// empty string for names made only of punctuation; such names never match.
std::string normalize_name(std::string_view name);

/// `conflict/<sha256 of the two record ids, sorted, newline-joined>`.
std::string make_pair_id(std::string_view record_a, std::string_view record_b);

struct AutoResolveResult {
  /// Sorted by (record_a, record_b).
  std::vector<ResolutionDecision> decisions;
  /// Sorted by (record_a, record_b); record_a has the smaller record_id.
  std::vector<ConflictPair> conflicts;
};

/// Splits record pairs into rule-resolved identities and residual conflicts.
///
/// - same name and a shared non-repository URL -> auto "same"
/// - same name otherwise -> name_collision
/// - different names sharing any canonical URL, repositories included ->
///   url_collision
///
/// The result does not depend on corpus order. Throws ValidationError when
/// the corpus breaks record invariants.
AutoResolveResult auto_resolve(const std::vector<SoftwareMetadataRecord>& corpus,
                               const ForgeHosts& forges = ForgeHosts::defaults());

struct ConflictStats {
  std::size_t total_records = 0;
  std::size_t conflict_count = 0;
  double conflict_fraction = 0.0;
};

ConflictStats conflict_stats(std::size_t total_records, std::size_t conflict_count);
ConflictStats conflict_stats(const std::vector<SoftwareMetadataRecord>& corpus,
                             const std::vector<ConflictPair>& pairs);

/// Reads `{"repository_hosts": [...], "package_index_hosts": [...]}`; missing
/// keys keep the shipped defaults.
ForgeHosts load_forge_hosts(const std::filesystem::path& path);

}  // namespace softid::harvest
