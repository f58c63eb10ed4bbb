#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/adjudicator/adjudicate.hpp"
#include "softid/core/model.hpp"
#include "softid/harvest/decision.hpp"

namespace softid::consensus {

/// A committee of models whose unanimous verdict is accepted.
struct ProxySpec {
  std::string name;
  /// Model ids, or `slot:<name>` references resolved against the models file.
  std::vector<std::string> members;

  bool operator==(const ProxySpec&) const = default;
};

/// At least two distinct, non-empty members and a non-empty name.
void validate(const ProxySpec& spec);

enum class DeferReason { kDisagreement, kMemberSkipped };

std::string_view to_string(DeferReason reason);
std::optional<DeferReason> parse_defer_reason(std::string_view text);

struct ProxyDecision {
  std::string pair_id;
  std::string record_a;
  std::string record_b;
  std::string proxy;
  std::variant<Verdict, DeferReason> outcome = DeferReason::kDisagreement;

  bool accepted() const { return std::holds_alternative<Verdict>(outcome); }
  const Verdict* verdict() const { return std::get_if<Verdict>(&outcome); }

  bool operator==(const ProxyDecision&) const = default;
};

/// Carries `"type": "proxy"` so decision files can mix proxy and resolution
/// lines.
void to_json(nlohmann::json& j, const ProxyDecision& d);
void from_json(const nlohmann::json& j, ProxyDecision& d);

/// Unanimity rule for one pair. `results` must hold exactly one result per
/// member for the same pair; results of non-members are ignored.
///
/// Any skipped member defers with member_skipped (checked first). Otherwise
/// identical labels are accepted with the lowest member confidence and the
/// member explanations joined in member order; any mismatch defers with
/// disagreement.
ProxyDecision run_proxy(const ProxySpec& spec,
                        const std::vector<adjudicator::AdjudicationResult>& results);

/// Applies run_proxy to every pair present in `results`, ordered by pair_id.
/// Throws ValidationError when a pair lacks a member's result.
std::vector<ProxyDecision> run_proxy_all(
    const ProxySpec& spec, const std::vector<adjudicator::AdjudicationResult>& results);

struct Coverage {
  std::size_t accepted_count = 0;
  std::size_t deferred_count = 0;
  /// accepted / total; 0 for empty input.
  double coverage_fraction = 0.0;
};

Coverage proxy_coverage(const std::vector<ProxyDecision>& decisions);

/// Model-origin resolution decision for an accepted same/different verdict.
/// Unclear acceptances and deferrals yield nothing.
std::optional<ResolutionDecision> to_resolution(const ProxyDecision& d);

/// Five two-member committees by symbolic slot: large-dense, small-dense,
/// large-smoe, small-smoe.
std::vector<ProxySpec> default_proxies();

/// Reads `{"proxies": [{"name": ..., "members": [...]}]}`. Names must be
/// unique.
std::vector<ProxySpec> load_proxy_specs(const std::filesystem::path& path);
std::vector<ProxySpec> parse_proxy_specs(const nlohmann::json& j);

/// Replaces `slot:<name>` members with the id of the model in that slot.
/// Throws ValidationError for unknown slots or members that collapse onto
/// the same model.
ProxySpec resolve_slots(const ProxySpec& spec, const adjudicator::ModelsConfig& models);

}  // namespace softid::consensus
