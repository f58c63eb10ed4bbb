#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "softid/core/model.hpp"

namespace softid {

/// Who produced an identity decision. Declaration order is precedence order
/// at merge time, strongest last.
enum class Origin { kModelProxy = 0, kAuto = 1, kHuman = 2 };

std::string_view to_string(Origin origin);
std::optional<Origin> parse_origin(std::string_view text);

/// An identity claim about two records.
struct ResolutionDecision {
  std::string pair_id;
  std::string record_a;
  std::string record_b;
  Label outcome = Label::kUnclear;
  Origin origin = Origin::kAuto;
  /// Rule name, proxy name, or annotator id.
  std::string provenance;

  bool operator==(const ResolutionDecision&) const = default;
};

void to_json(nlohmann::json& j, const ResolutionDecision& d);
void from_json(const nlohmann::json& j, ResolutionDecision& d);

}  // namespace softid
